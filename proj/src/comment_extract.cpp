#include "citescan/comment_extract.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <ostream>
#include <istream>

#include <nlohmann/json.hpp>

#include "citescan/errors.hpp"
#include "citescan/utf8.hpp"

namespace citescan {

namespace {

enum class HeredocStyle { None, Ruby, Php };

struct LexRules {
    bool slash_line = false;   // //
    bool hash_line = false;    // #
    bool block = false;        // /* */
    bool ruby_block = false;   // =begin / =end at column 0
    bool triple_quote = false; // ''' and """
    bool backtick_string = false;
    bool multiline_strings = false;  // ' and " may span lines
    HeredocStyle heredoc = HeredocStyle::None;
};

LexRules rules_for(Language language) {
    LexRules r;
    switch (language) {
        case Language::C:
        case Language::Cpp:
        case Language::Java:
            r.slash_line = r.block = true;
            break;
        case Language::JavaScript:
            r.slash_line = r.block = r.backtick_string = true;
            break;
        case Language::Python:
            r.hash_line = r.triple_quote = true;
            break;
        case Language::Ruby:
            r.hash_line = r.ruby_block = r.backtick_string = true;
            r.multiline_strings = true;
            r.heredoc = HeredocStyle::Ruby;
            break;
        case Language::Php:
            r.slash_line = r.hash_line = r.block = r.backtick_string = true;
            r.multiline_strings = true;
            r.heredoc = HeredocStyle::Php;
            break;
    }
    return r;
}

struct PendingHeredoc {
    std::string tag;
    bool indented = false;  // <<- / <<~ (Ruby) or any PHP closer
};

class CommentLexer {
public:
    CommentLexer(std::string_view content, LexRules rules)
        : text_(content), rules_(rules) {}

    std::vector<Comment> run() {
        while (pos_ < text_.size()) {
            if (at_line_start_ && !heredocs_.empty()) {
                consume_heredoc_body();
                continue;
            }
            if (at_line_start_ && rules_.ruby_block && match("=begin") &&
                boundary_after(pos_ + 6)) {
                lex_ruby_block();
                continue;
            }
            const char c = text_[pos_];
            if (rules_.slash_line && c == '/' && peek(1) == '/') {
                lex_line_comment(2);
            } else if (rules_.hash_line && c == '#') {
                lex_line_comment(1);
            } else if (rules_.block && c == '/' && peek(1) == '*') {
                lex_block_comment();
            } else if (rules_.heredoc == HeredocStyle::Php && match("<<<")) {
                lex_php_heredoc_open();
            } else if (rules_.heredoc == HeredocStyle::Ruby && c == '<' &&
                       peek(1) == '<' && peek(-1) != '<' && try_ruby_heredoc_open()) {
                // opener consumed by try_ruby_heredoc_open
            } else if (rules_.triple_quote && (c == '"' || c == '\'') &&
                       peek(1) == c && peek(2) == c) {
                lex_string(std::string(3, c), true, true);
            } else if (c == '"' || c == '\'') {
                lex_string(std::string(1, c), rules_.multiline_strings, true);
            } else if (rules_.backtick_string && c == '`') {
                lex_string("`", true, true);
            } else {
                advance();
            }
        }
        return std::move(comments_);
    }

private:
    char peek(std::ptrdiff_t offset) const {
        const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(pos_) + offset;
        if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(text_.size())) return '\0';
        return text_[static_cast<std::size_t>(idx)];
    }

    bool match(std::string_view prefix) const {
        return text_.compare(pos_, prefix.size(), prefix) == 0;
    }

    bool boundary_after(std::size_t idx) const {
        return idx >= text_.size() || text_[idx] == ' ' || text_[idx] == '\t' ||
               text_[idx] == '\r' || text_[idx] == '\n';
    }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            at_line_start_ = true;
        } else {
            at_line_start_ = false;
        }
        ++pos_;
    }

    void advance_to(std::size_t target) {
        while (pos_ < target && pos_ < text_.size()) advance();
    }

    void emit(CommentKind kind, int start_line, int end_line, std::size_t begin,
              std::size_t end) {
        // Empty comments ("//" alone) carry no text worth keeping.
        if (end <= begin) return;
        comments_.push_back(Comment{start_line, end_line,
                                    std::string(text_.substr(begin, end - begin)), kind});
    }

    void lex_line_comment(std::size_t marker_len) {
        const int start_line = line_;
        advance_to(pos_ + marker_len);
        const std::size_t begin = pos_;
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
        emit(CommentKind::Line, start_line, start_line, begin, pos_);
    }

    void lex_block_comment() {
        const int start_line = line_;
        advance_to(pos_ + 2);
        const std::size_t begin = pos_;
        const std::size_t close = text_.find("*/", pos_);
        if (close == std::string_view::npos) {
            advance_to(text_.size());
            log_warn("unterminated block comment at line " + std::to_string(start_line));
            emit(CommentKind::Block, start_line, line_, begin, text_.size());
            return;
        }
        advance_to(close);
        emit(CommentKind::Block, start_line, line_, begin, close);
        advance_to(close + 2);
    }

    void lex_ruby_block() {
        const int start_line = line_;
        advance_to(pos_ + 6);
        const std::size_t begin = pos_;
        // The closer is "=end" at column 0.
        std::size_t search = pos_;
        std::size_t close = std::string_view::npos;
        while (true) {
            const std::size_t nl = text_.find("\n=end", search);
            if (nl == std::string_view::npos) break;
            if (boundary_after(nl + 5)) {
                close = nl;
                break;
            }
            search = nl + 1;
        }
        if (close == std::string_view::npos) {
            advance_to(text_.size());
            log_warn("unterminated =begin block at line " + std::to_string(start_line));
            emit(CommentKind::Block, start_line, line_, begin, text_.size());
            return;
        }
        advance_to(close + 1);  // now at the "=end" line
        emit(CommentKind::Block, start_line, line_, begin, close + 1);
        // Skip the rest of the =end line.
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
    }

    // Returns once the closing delimiter (or an unescaped newline for
    // single-line strings) has been consumed.
    void lex_string(const std::string& closer, bool multiline, bool escapes) {
        advance_to(pos_ + closer.size());
        while (pos_ < text_.size()) {
            if (escapes && text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
                advance();
                advance();
                continue;
            }
            if (!multiline && text_[pos_] == '\n') {
                advance();
                return;
            }
            if (match(closer)) {
                advance_to(pos_ + closer.size());
                return;
            }
            advance();
        }
    }

    // Ruby heredoc opener: <<[-~]?TAG or <<[-~]?"TAG" / 'TAG' / `TAG`.
    // Requires an identifier-looking tag starting with an uppercase letter or
    // underscore (the overwhelmingly common convention) to stay clear of the
    // << shift operator.
    bool try_ruby_heredoc_open() {
        std::size_t probe = pos_ + 2;
        bool indented = false;
        if (probe < text_.size() && (text_[probe] == '-' || text_[probe] == '~')) {
            indented = true;
            ++probe;
        }
        char quote = '\0';
        if (probe < text_.size() &&
            (text_[probe] == '"' || text_[probe] == '\'' || text_[probe] == '`')) {
            quote = text_[probe];
            ++probe;
        }
        std::size_t tag_begin = probe;
        while (probe < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[probe])) || text_[probe] == '_'))
            ++probe;
        if (probe == tag_begin) return false;
        if (quote == '\0' && !indented) {
            const char first = text_[tag_begin];
            if (!(std::isupper(static_cast<unsigned char>(first)) || first == '_'))
                return false;
        }
        if (quote != '\0') {
            if (probe >= text_.size() || text_[probe] != quote) return false;
            ++probe;
        }
        heredocs_.push_back(PendingHeredoc{
            std::string(text_.substr(tag_begin, probe - tag_begin - (quote ? 1 : 0))),
            indented});
        advance_to(probe);
        return true;
    }

    void lex_php_heredoc_open() {
        std::size_t probe = pos_ + 3;
        char quote = '\0';
        if (probe < text_.size() && (text_[probe] == '"' || text_[probe] == '\'')) {
            quote = text_[probe];
            ++probe;
        }
        std::size_t tag_begin = probe;
        while (probe < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[probe])) || text_[probe] == '_'))
            ++probe;
        if (probe == tag_begin) {
            advance_to(pos_ + 3);
            return;
        }
        std::string tag(text_.substr(tag_begin, probe - tag_begin));
        if (quote != '\0' && probe < text_.size() && text_[probe] == quote) ++probe;
        heredocs_.push_back(PendingHeredoc{std::move(tag), true});
        advance_to(probe);
    }

    // Consumes full lines until the pending heredoc terminator line.
    void consume_heredoc_body() {
        const PendingHeredoc pending = heredocs_.front();
        heredocs_.pop_front();
        while (pos_ < text_.size()) {
            const std::size_t line_begin = pos_;
            std::size_t line_end = text_.find('\n', line_begin);
            if (line_end == std::string_view::npos) line_end = text_.size();
            std::string_view line = text_.substr(line_begin, line_end - line_begin);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            std::string_view body = line;
            if (pending.indented) {
                while (!body.empty() && (body.front() == ' ' || body.front() == '\t'))
                    body.remove_prefix(1);
            }
            // Allow a trailing ';' or ',' after the closer (PHP style).
            if (body.substr(0, pending.tag.size()) == pending.tag) {
                std::string_view rest = body.substr(pending.tag.size());
                while (!rest.empty() && (rest.back() == ';' || rest.back() == ','))
                    rest.remove_suffix(1);
                if (rest.empty()) {
                    advance_to(line_end);
                    return;
                }
            }
            advance_to(std::min(line_end + 1, text_.size()));
        }
    }

    std::string_view text_;
    LexRules rules_;
    std::size_t pos_ = 0;
    int line_ = 1;
    bool at_line_start_ = true;
    std::deque<PendingHeredoc> heredocs_;
    std::vector<Comment> comments_;
};

}  // namespace

std::vector<Comment> extract_comments(std::string_view content, Language language) {
    const std::string sanitized = utf8::sanitize(content);
    return CommentLexer(sanitized, rules_for(language)).run();
}

std::string normalize(std::string_view raw_text) {
    std::string replaced;
    replaced.reserve(raw_text.size());
    for (char c : raw_text) {
        switch (c) {
            case '\n':
            case '/':
            case '*':
            case '\\':
            case '#':
            case '!':
                replaced += ' ';
                break;
            default:
                replaced += c;
        }
    }
    std::string out;
    out.reserve(replaced.size());
    bool in_space = true;  // also trims leading whitespace
    for (char c : replaced) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out += ' ';
        in_space = false;
        out += c;
    }
    return out;
}

void DedupAccumulator::add(Language language, std::string normalized_text,
                           Provenance provenance) {
    groups_[{language, std::move(normalized_text)}].push_back(std::move(provenance));
    ++input_count_;
}

void DedupAccumulator::merge(DedupAccumulator&& other) {
    for (auto& [key, provenance] : other.groups_) {
        auto& target = groups_[key];
        target.insert(target.end(), std::make_move_iterator(provenance.begin()),
                      std::make_move_iterator(provenance.end()));
    }
    input_count_ += other.input_count_;
    other.groups_.clear();
    other.input_count_ = 0;
}

std::vector<NormalizedComment> DedupAccumulator::finish() {
    std::vector<NormalizedComment> out;
    out.reserve(groups_.size());
    for (auto& [key, provenance] : groups_) {
        NormalizedComment comment;
        comment.language = key.first;
        comment.text = key.second;
        comment.occurrences = provenance.size();
        comment.provenance = std::move(provenance);
        out.push_back(std::move(comment));
    }
    groups_.clear();
    input_count_ = 0;
    return out;
}

std::vector<NormalizedComment> dedup(
    const std::vector<std::pair<Language, std::pair<std::string, Provenance>>>& comments) {
    DedupAccumulator acc;
    for (const auto& [language, rest] : comments)
        acc.add(language, rest.first, rest.second);
    return acc.finish();
}

void write_comments_jsonl(std::ostream& out, const std::vector<NormalizedComment>& comments) {
    for (const auto& comment : comments) {
        nlohmann::json obj;
        obj["lang"] = std::string(to_string(comment.language));
        obj["text"] = comment.text;
        obj["occurrences"] = comment.occurrences;
        auto provenance = nlohmann::json::array();
        for (const auto& p : comment.provenance)
            provenance.push_back({{"repo", p.repo}, {"path", p.path}, {"line", p.line}});
        obj["provenance"] = std::move(provenance);
        out << obj.dump() << '\n';
    }
}

std::vector<NormalizedComment> read_comments_jsonl(std::istream& in) {
    std::vector<NormalizedComment> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("comments line " + std::to_string(line_no) + ": " + e.what());
        }
        NormalizedComment comment;
        const auto language = language_from_string(obj.value("lang", ""));
        if (!language)
            throw ParseError("comments line " + std::to_string(line_no) +
                             ": unknown lang \"" + obj.value("lang", "") + "\"");
        comment.language = *language;
        comment.text = obj.value("text", "");
        comment.occurrences = obj.value("occurrences", std::uint64_t{1});
        for (const auto& p : obj.value("provenance", nlohmann::json::array()))
            comment.provenance.push_back(Provenance{
                p.value("repo", ""), p.value("path", ""), p.value("line", 0)});
        out.push_back(std::move(comment));
    }
    return out;
}

std::vector<NormalizedComment> load_comments_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_comments_jsonl(in);
}

void save_comments_jsonl(const std::string& path, const std::vector<NormalizedComment>& comments) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_comments_jsonl(out, comments);
}

}  // namespace citescan
