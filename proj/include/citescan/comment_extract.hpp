#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "citescan/types.hpp"

namespace citescan {

enum class CommentKind : std::uint8_t { Line, Block };

// One comment as lexed from a source file. raw_text is the exact substring
// between the delimiters (delimiters excluded).
struct Comment {
    int start_line = 1;
    int end_line = 1;
    std::string raw_text;
    CommentKind kind = CommentKind::Line;
};

// A deduplicated comment: one normalized text per language, with every place
// it occurred.
struct NormalizedComment {
    std::string text;
    std::uint64_t occurrences = 0;
    Language language = Language::C;
    std::vector<Provenance> provenance;
};

// Lexes all line and block comments out of `content` following the language's
// comment grammar. Comment markers inside string literals are ignored. An
// unterminated block comment is emitted as a comment running to end-of-file
// (with a warning). Invalid UTF-8 in `content` is sanitized first.
std::vector<Comment> extract_comments(std::string_view content, Language language);

// Replaces each of the special characters \n / * \ # ! with a space, collapses
// whitespace runs, and trims. Idempotent.
std::string normalize(std::string_view raw_text);

// Exact-match dedup on (language, normalized text). Partial accumulators merge
// associatively, so parallel folds combine into the same result.
class DedupAccumulator {
public:
    void add(Language language, std::string normalized_text, Provenance provenance);
    void merge(DedupAccumulator&& other);

    std::uint64_t input_count() const { return input_count_; }

    // Sorted by (language, text). Leaves the accumulator empty.
    std::vector<NormalizedComment> finish();

private:
    std::map<std::pair<Language, std::string>, std::vector<Provenance>> groups_;
    std::uint64_t input_count_ = 0;
};

std::vector<NormalizedComment> dedup(
    const std::vector<std::pair<Language, std::pair<std::string, Provenance>>>& comments);

// JSONL interchange: {"lang","text","occurrences","provenance":[...]}.
void write_comments_jsonl(std::ostream& out, const std::vector<NormalizedComment>& comments);
std::vector<NormalizedComment> read_comments_jsonl(std::istream& in);
std::vector<NormalizedComment> load_comments_jsonl(const std::string& path);
void save_comments_jsonl(const std::string& path, const std::vector<NormalizedComment>& comments);

}  // namespace citescan
