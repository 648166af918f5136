#include "citescan/types.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace citescan {

std::string_view to_string(Language lang) {
    switch (lang) {
        case Language::C: return "c";
        case Language::Cpp: return "cpp";
        case Language::Java: return "java";
        case Language::JavaScript: return "javascript";
        case Language::Python: return "python";
        case Language::Php: return "php";
        case Language::Ruby: return "ruby";
    }
    return "?";
}

std::optional<Language> language_from_string(std::string_view name) {
    for (Language lang : kAllLanguages)
        if (to_string(lang) == name) return lang;
    if (name == "c++") return Language::Cpp;
    if (name == "js") return Language::JavaScript;
    return std::nullopt;
}

std::string_view to_string(EntityType type) {
    switch (type) {
        case EntityType::Author: return "author";
        case EntityType::Title: return "title";
        case EntityType::Year: return "year";
        case EntityType::BooktitleOrJournal: return "booktitle_or_journal";
        case EntityType::Pages: return "pages";
        case EntityType::Volume: return "volume";
        case EntityType::Number: return "number";
        case EntityType::Month: return "month";
        case EntityType::Url: return "url";
        case EntityType::Publisher: return "publisher";
        case EntityType::Address: return "address";
        case EntityType::Doi: return "doi";
        case EntityType::Isbn: return "isbn";
        case EntityType::Issn: return "issn";
    }
    return "?";
}

std::optional<EntityType> entity_type_from_string(std::string_view name) {
    for (EntityType type : kAllEntityTypes)
        if (to_string(type) == name) return type;
    return std::nullopt;
}

std::size_t EntityTypeSet::size() const {
    return static_cast<std::size_t>(std::popcount(bits_));
}

std::vector<EntityType> EntityTypeSet::to_vector() const {
    std::vector<EntityType> out;
    for (EntityType type : kAllEntityTypes)
        if (contains(type)) out.push_back(type);
    return out;
}

std::string EntityTypeSet::to_string() const {
    std::string out;
    for (EntityType type : to_vector()) {
        if (!out.empty()) out += ',';
        out += citescan::to_string(type);
    }
    return out;
}

EntityTypeSet EntityTypeSet::parse(std::string_view csv) {
    EntityTypeSet set;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string_view::npos) comma = csv.size();
        std::string_view item = csv.substr(pos, comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) {
            auto type = entity_type_from_string(item);
            if (!type)
                throw std::invalid_argument("unknown entity type: " + std::string(item));
            set.insert(*type);
        }
        pos = comma + 1;
    }
    return set;
}

}  // namespace citescan
