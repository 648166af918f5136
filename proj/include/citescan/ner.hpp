#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "citescan/types.hpp"

namespace citescan {

// Offsets count Unicode scalar values into the tagged text, end exclusive.
struct Token {
    std::string text;
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const Token&) const = default;
};

// Whitespace split, then leading/trailing punctuation (.,;:()[]"'`) peeled off
// into single-character tokens.
std::vector<Token> tokenize(std::string_view text);

// Venue, month and publisher lexicons backing the rule tagger and the model's
// lexicon-membership features.
class LexiconSet {
public:
    static LexiconSet load(const std::string& venues_path,
                           const std::string& months_path,
                           const std::string& publishers_path);
    // All three files as "<dir>/venues.txt" etc.
    static LexiconSet load_dir(const std::string& dir);

    void add_venue(std::string_view entry);
    void add_month(std::string_view entry);
    void add_publisher(std::string_view entry);

    const std::vector<std::vector<std::string>>& venues() const { return venues_; }
    const std::vector<std::vector<std::string>>& publishers() const { return publishers_; }
    bool is_month(std::string_view token) const;
    bool in_venue_vocab(std::string_view token) const;
    bool in_publisher_vocab(std::string_view token) const;

    bool empty() const { return venues_.empty() && months_.empty() && publishers_.empty(); }

private:
    std::vector<std::vector<std::string>> venues_;      // lowercased token sequences
    std::vector<std::vector<std::string>> publishers_;  // lowercased token sequences
    std::unordered_set<std::string> months_;
    std::unordered_set<std::string> venue_vocab_;
    std::unordered_set<std::string> publisher_vocab_;
};

struct AnnotatedComment {
    std::string text;
    std::vector<EntitySpan> gold;
    std::map<std::string, std::string> labels;  // free-form qualitative codes
};

// Deterministic pattern/lexicon tagger. Covers years, months, urls, dois,
// isbn/issn, keyword-anchored volume/number/pages, lexicon venues and
// publishers, surname+initials authors, and quoted or gap-bounded titles.
std::vector<EntitySpan> rule_tag(std::string_view text, const LexiconSet& lexicons);

// Averaged-perceptron BIO tagger over the 14 entity types.
class TaggerModel {
public:
    using WeightMap = std::map<std::string, std::map<int, double>>;

    TaggerModel() = default;
    TaggerModel(WeightMap weights, LexiconSet lexicons, int epochs,
                std::uint64_t seed, std::uint64_t corpus_hash);

    const WeightMap& weights() const { return weights_; }
    const LexiconSet& lexicons() const { return lexicons_; }
    int epochs() const { return epochs_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t corpus_hash() const { return corpus_hash_; }
    bool trained() const { return !weights_.empty(); }

    // Versioned JSON container. Loading rejects unknown versions.
    std::string serialize() const;
    static TaggerModel deserialize(std::string_view data);
    void save(const std::string& path) const;
    static TaggerModel load(const std::string& path);

private:
    WeightMap weights_;
    LexiconSet lexicons_;
    int epochs_ = 0;
    std::uint64_t seed_ = 0;
    std::uint64_t corpus_hash_ = 0;
};

// Trains `epochs` passes with seeded shuffling; deterministic for a fixed
// (corpus, epochs, seed). Gold spans that cross token boundaries are snapped
// outward and logged. Throws EmptyCorpus / DegenerateCorpus.
TaggerModel train(const std::vector<AnnotatedComment>& corpus, int epochs,
                  std::uint64_t seed, const LexiconSet& lexicons);

// Greedy BIO decode with invalid-transition repair (I-X after O or after a
// different type opens a fresh B-X). Spans are non-overlapping and ordered.
std::vector<EntitySpan> tag(const TaggerModel& model, std::string_view text);

// Union preferring model spans on overlap; rule spans fill the gaps.
std::vector<EntitySpan> merge_spans(std::vector<EntitySpan> model_spans,
                                    std::vector<EntitySpan> rule_spans);

// tag() merged with rule_tag() over the model's lexicons.
std::vector<EntitySpan> tag_with_rules(const TaggerModel& model, std::string_view text);

}  // namespace citescan
