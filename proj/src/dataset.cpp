#include "citescan/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "citescan/utf8.hpp"

namespace citescan {

namespace {

std::string lowercase_ascii(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

bool matches_group_b(std::string_view text, const KeywordGroupConfig& config) {
    const std::string haystack = lowercase_ascii(text);
    for (const auto& marker : config.markers) {
        if (haystack.find(lowercase_ascii(marker)) != std::string::npos) return true;
    }
    for (const auto& prefix : config.std_prefixes) {
        const std::string needle = lowercase_ascii(prefix);
        std::size_t pos = 0;
        while ((pos = haystack.find(needle, pos)) != std::string::npos) {
            std::size_t digits_begin = pos + needle.size();
            std::size_t digits_end = digits_begin;
            while (digits_end < haystack.size() &&
                   std::isdigit(static_cast<unsigned char>(haystack[digits_end])))
                ++digits_end;
            if (digits_end > digits_begin) {
                const int value = std::stoi(haystack.substr(digits_begin, digits_end - digits_begin));
                if (std::find(config.std_numbers.begin(), config.std_numbers.end(), value) !=
                    config.std_numbers.end())
                    return true;
            }
            ++pos;
        }
    }
    return false;
}

GroupSplit group_comments(const std::vector<NormalizedComment>& comments,
                          const KeywordGroupConfig& config) {
    GroupSplit split;
    for (const auto& comment : comments) {
        if (matches_group_b(comment.text, config))
            split.group_b.push_back(comment);
        else
            split.group_a.push_back(comment);
    }
    return split;
}

std::vector<KeywordGroupConfig> load_group_configs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json obj;
    try {
        in >> obj;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    std::vector<KeywordGroupConfig> configs;
    const nlohmann::json groups = obj.value("groups", nlohmann::json::object());
    for (const auto& [keyword, body] : groups.items()) {
        KeywordGroupConfig config;
        config.keyword = lowercase_ascii(keyword);
        for (const auto& m : body.value("markers", nlohmann::json::array()))
            config.markers.push_back(m.get<std::string>());
        for (const auto& n : body.value("std_numbers", nlohmann::json::array()))
            config.std_numbers.push_back(n.get<int>());
        for (const auto& p : body.value("std_prefixes", nlohmann::json::array()))
            config.std_prefixes.push_back(p.get<std::string>());
        configs.push_back(std::move(config));
    }
    return configs;
}

std::uint64_t sample_size(std::uint64_t population, const SampleSpec& spec) {
    if (population == 0) return 0;
    const double e = spec.interval / 100.0;
    const double n0 = spec.z * spec.z * spec.p * (1.0 - spec.p) / (e * e);
    const double n = n0 / (1.0 + (n0 - 1.0) / static_cast<double>(population));
    const auto rounded = static_cast<std::uint64_t>(std::floor(n + 0.5));
    return std::min(rounded, population);
}

// ---------------------------------------------------------------------------
// Annotation JSONL

std::vector<AnnotatedComment> read_annotations(std::istream& in) {
    std::vector<AnnotatedComment> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("annotations line " + std::to_string(line_no) + ": " + e.what());
        }
        AnnotatedComment comment;
        comment.text = obj.value("text", "");
        const std::size_t length = utf8::scalar_length(comment.text);
        for (const auto& entity : obj.value("entities", nlohmann::json::array())) {
            EntitySpan span;
            span.begin = entity.value("start", std::uint64_t{0});
            span.end = entity.value("end", std::uint64_t{0});
            const std::string type_name = entity.value("type", "");
            const auto type = entity_type_from_string(type_name);
            if (!type)
                throw ParseError("annotations line " + std::to_string(line_no) +
                                 ": unknown entity type \"" + type_name + "\"");
            span.type = *type;
            if (span.begin >= span.end || span.end > length)
                throw OffsetOutOfBounds("annotations line " + std::to_string(line_no) +
                                        ": span " + std::to_string(span.begin) + ".." +
                                        std::to_string(span.end) + " outside text of length " +
                                        std::to_string(length));
            comment.gold.push_back(span);
        }
        const nlohmann::json labels = obj.value("labels", nlohmann::json::object());
        for (const auto& [key, value] : labels.items())
            comment.labels[key] = value.get<std::string>();
        out.push_back(std::move(comment));
    }
    return out;
}

std::vector<AnnotatedComment> load_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_annotations(in);
}

void write_annotations(std::ostream& out, const std::vector<AnnotatedComment>& comments) {
    for (const auto& comment : comments) {
        nlohmann::json obj;
        obj["text"] = comment.text;
        auto entities = nlohmann::json::array();
        for (const auto& span : comment.gold)
            entities.push_back({{"start", span.begin},
                                {"end", span.end},
                                {"type", std::string(to_string(span.type))}});
        obj["entities"] = std::move(entities);
        if (!comment.labels.empty()) {
            nlohmann::json labels = nlohmann::json::object();
            for (const auto& [key, value] : comment.labels) labels[key] = value;
            obj["labels"] = std::move(labels);
        }
        out << obj.dump() << '\n';
    }
}

void save_annotations(const std::vector<AnnotatedComment>& comments, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_annotations(out, comments);
}

}  // namespace citescan
