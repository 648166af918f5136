#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace citescan {

// The seven languages the corpus walker classifies.
enum class Language : std::uint8_t {
    C,
    Cpp,
    Java,
    JavaScript,
    Python,
    Php,
    Ruby,
};

inline constexpr std::array<Language, 7> kAllLanguages = {
    Language::C,         Language::Cpp, Language::Java, Language::JavaScript,
    Language::Python,    Language::Php, Language::Ruby,
};

std::string_view to_string(Language lang);
std::optional<Language> language_from_string(std::string_view name);

// The 14 publication-related entity types recognized in comments.
enum class EntityType : std::uint8_t {
    Author,
    Title,
    Year,
    BooktitleOrJournal,
    Pages,
    Volume,
    Number,
    Month,
    Url,
    Publisher,
    Address,
    Doi,
    Isbn,
    Issn,
};

inline constexpr std::size_t kEntityTypeCount = 14;

inline constexpr std::array<EntityType, kEntityTypeCount> kAllEntityTypes = {
    EntityType::Author, EntityType::Title,   EntityType::Year,
    EntityType::BooktitleOrJournal,          EntityType::Pages,
    EntityType::Volume, EntityType::Number,  EntityType::Month,
    EntityType::Url,    EntityType::Publisher,
    EntityType::Address, EntityType::Doi,    EntityType::Isbn,
    EntityType::Issn,
};

std::string_view to_string(EntityType type);
std::optional<EntityType> entity_type_from_string(std::string_view name);

// Small value set of entity types, used for detection criteria.
class EntityTypeSet {
public:
    constexpr EntityTypeSet() = default;
    constexpr EntityTypeSet(std::initializer_list<EntityType> types) {
        for (EntityType t : types) insert(t);
    }

    constexpr void insert(EntityType t) { bits_ |= bit(t); }
    constexpr bool contains(EntityType t) const { return (bits_ & bit(t)) != 0; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr bool contains_all(EntityTypeSet other) const {
        return (bits_ & other.bits_) == other.bits_;
    }
    constexpr bool operator==(const EntityTypeSet&) const = default;
    constexpr bool operator<(const EntityTypeSet& o) const { return bits_ < o.bits_; }

    std::size_t size() const;
    std::vector<EntityType> to_vector() const;
    // Comma-separated type names, e.g. "author,title,year".
    std::string to_string() const;
    static EntityTypeSet parse(std::string_view csv);

private:
    static constexpr std::uint16_t bit(EntityType t) {
        return static_cast<std::uint16_t>(1u << static_cast<unsigned>(t));
    }
    std::uint16_t bits_ = 0;
};

enum class SpanSource : std::uint8_t { Model, Rule };

// A typed character-offset span within a normalized comment.
// Offsets count Unicode scalar values, end is exclusive.
struct EntitySpan {
    EntityType type;
    std::size_t begin = 0;
    std::size_t end = 0;
    SpanSource source = SpanSource::Model;

    bool operator==(const EntitySpan&) const = default;
};

// Where a comment occurrence came from.
struct Provenance {
    std::string repo;
    std::string path;
    int line = 0;

    bool operator==(const Provenance&) const = default;
};

}  // namespace citescan
