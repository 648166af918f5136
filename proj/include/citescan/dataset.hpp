#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "citescan/comment_extract.hpp"
#include "citescan/errors.hpp"
#include "citescan/ner.hpp"
#include "citescan/rng.hpp"

namespace citescan {

// Splits keyword-filtered comments into group A (prone to contain citations)
// and group B (matched by a marker or a standard-number pattern).
struct KeywordGroupConfig {
    std::string keyword;                     // lowercase, e.g. "acm"
    std::vector<std::string> markers;        // case-insensitive substrings
    std::vector<int> std_numbers;            // e.g. 754, 802
    std::vector<std::string> std_prefixes;   // e.g. "IEEE ", "IEEE-", "IEEE_"
};

struct GroupSplit {
    std::vector<NormalizedComment> group_a;
    std::vector<NormalizedComment> group_b;
};

GroupSplit group_comments(const std::vector<NormalizedComment>& comments,
                          const KeywordGroupConfig& config);

bool matches_group_b(std::string_view text, const KeywordGroupConfig& config);

// JSON config: {"groups":{"<keyword>":{"markers":[...],"std_numbers":[...],
// "std_prefixes":[...]}}}. The bundled data/groups.json carries the ACM/IEEE
// scheme.
std::vector<KeywordGroupConfig> load_group_configs(const std::string& path);

// Cochran sample size with finite-population correction:
// n0 = z^2 p (1-p) / e^2, n = n0 / (1 + (n0 - 1) / N), rounded half up.
struct SampleSpec {
    double confidence = 0.95;
    double interval = 5.0;  // percentage points
    double z = 1.96;
    double p = 0.5;
};

std::uint64_t sample_size(std::uint64_t population, const SampleSpec& spec = {});

// Uniform sample without replacement via a seeded shuffle; output preserves
// the input's relative order. Throws SampleTooLarge when n > items.size().
template <typename T>
std::vector<T> draw_sample(const std::vector<T>& items, std::size_t n,
                           std::uint64_t seed) {
    if (n > items.size())
        throw SampleTooLarge("sample size " + std::to_string(n) +
                             " exceeds population " + std::to_string(items.size()));
    std::vector<std::size_t> indices(items.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    deterministic_shuffle(indices, seed);
    indices.resize(n);
    std::sort(indices.begin(), indices.end());
    std::vector<T> picked;
    picked.reserve(n);
    for (std::size_t i : indices) picked.push_back(items[i]);
    return picked;
}

// Annotation JSONL: {"text","entities":[{"start","end","type"}],"labels":{..}}
// with offsets in Unicode scalar values. Round-trips exactly; offsets are
// validated against the text bounds.
std::vector<AnnotatedComment> read_annotations(std::istream& in);
std::vector<AnnotatedComment> load_annotations(const std::string& path);
void write_annotations(std::ostream& out, const std::vector<AnnotatedComment>& comments);
void save_annotations(const std::vector<AnnotatedComment>& comments, const std::string& path);

}  // namespace citescan
