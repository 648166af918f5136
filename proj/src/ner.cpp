#include "citescan/ner.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "citescan/errors.hpp"
#include "citescan/rng.hpp"
#include "citescan/utf8.hpp"

namespace citescan {

namespace {

bool is_split_punct(char32_t c) {
    switch (c) {
        case '.': case ',': case ';': case ':':
        case '(': case ')': case '[': case ']':
        case '"': case '\'': case '`':
            return true;
        default:
            return false;
    }
}

bool is_space_cp(char32_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string lowercase_ascii(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<char32_t> cps;
    cps.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) cps.push_back(utf8::decode_at(text, pos));

    auto make_token = [&cps](std::size_t begin, std::size_t end) {
        std::string out;
        for (std::size_t k = begin; k < end; ++k) out += utf8::encode(cps[k]);
        return Token{std::move(out), begin, end};
    };

    std::vector<Token> tokens;
    std::size_t i = 0;
    const std::size_t n = cps.size();
    while (i < n) {
        if (is_space_cp(cps[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !is_space_cp(cps[j])) ++j;
        std::size_t lead = i;
        while (lead < j && is_split_punct(cps[lead])) {
            tokens.push_back(make_token(lead, lead + 1));
            ++lead;
        }
        std::size_t tail = j;
        while (tail > lead && is_split_punct(cps[tail - 1])) --tail;
        if (lead < tail) tokens.push_back(make_token(lead, tail));
        for (std::size_t k = tail; k < j; ++k) tokens.push_back(make_token(k, k + 1));
        i = j;
    }
    return tokens;
}

// ---------------------------------------------------------------------------
// Lexicons

namespace {

std::vector<std::string> entry_tokens(std::string_view entry) {
    std::vector<std::string> words;
    for (const Token& t : tokenize(entry)) words.push_back(lowercase_ascii(t.text));
    return words;
}

std::vector<std::string> read_lexicon_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LexiconMissing("lexicon file not found: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

LexiconSet LexiconSet::load(const std::string& venues_path,
                            const std::string& months_path,
                            const std::string& publishers_path) {
    LexiconSet set;
    for (const auto& line : read_lexicon_lines(venues_path)) set.add_venue(line);
    for (const auto& line : read_lexicon_lines(months_path)) set.add_month(line);
    for (const auto& line : read_lexicon_lines(publishers_path)) set.add_publisher(line);
    return set;
}

LexiconSet LexiconSet::load_dir(const std::string& dir) {
    return load(dir + "/venues.txt", dir + "/months.txt", dir + "/publishers.txt");
}

void LexiconSet::add_venue(std::string_view entry) {
    auto words = entry_tokens(entry);
    if (words.empty()) return;
    for (const auto& w : words) venue_vocab_.insert(w);
    venues_.push_back(std::move(words));
}

void LexiconSet::add_month(std::string_view entry) {
    auto words = entry_tokens(entry);
    if (words.size() == 1) months_.insert(words.front());
}

void LexiconSet::add_publisher(std::string_view entry) {
    auto words = entry_tokens(entry);
    if (words.empty()) return;
    for (const auto& w : words) publisher_vocab_.insert(w);
    publishers_.push_back(std::move(words));
}

bool LexiconSet::is_month(std::string_view token) const {
    return months_.count(lowercase_ascii(token)) > 0;
}

bool LexiconSet::in_venue_vocab(std::string_view token) const {
    return venue_vocab_.count(lowercase_ascii(token)) > 0;
}

bool LexiconSet::in_publisher_vocab(std::string_view token) const {
    return publisher_vocab_.count(lowercase_ascii(token)) > 0;
}

// ---------------------------------------------------------------------------
// Rule tagger

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isdigit(c); });
}

bool is_year_token(std::string_view s) {
    if (s.size() != 4 || !all_digits(s)) return false;
    const int value = std::stoi(std::string(s));
    return value >= 1900 && value <= 2029;
}

bool is_digit_range(std::string_view s) {
    const std::size_t dash = s.find('-');
    if (dash == std::string_view::npos || dash == 0 || dash + 1 >= s.size()) return false;
    return all_digits(s.substr(0, dash)) && all_digits(s.substr(dash + 1));
}

bool is_isbn_ish(std::string_view s) {
    bool digit = false;
    for (char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c))) digit = true;
        else if (c != '-' && c != 'X' && c != 'x') return false;
    }
    return digit;
}

bool is_initial(std::string_view s) {
    return s.size() == 1 && std::isupper(static_cast<unsigned char>(s[0]));
}

bool is_surname(std::string_view s) {
    if (s.size() < 2) return false;
    if (!std::isupper(static_cast<unsigned char>(s[0]))) return false;
    bool has_lower = false;
    for (char c : s.substr(1)) {
        const unsigned char uc = static_cast<unsigned char>(c);
        if (std::islower(uc)) has_lower = true;
        else if (!std::isupper(uc) && c != '\'' && c != '-') return false;
    }
    return has_lower;
}

bool is_word(std::string_view s) {
    return std::any_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isalnum(c); });
}

struct RuleTagger {
    const std::vector<Token>& tokens;
    const LexiconSet& lex;
    std::vector<bool> claimed;
    std::vector<EntitySpan> spans;

    RuleTagger(const std::vector<Token>& t, const LexiconSet& l)
        : tokens(t), lex(l), claimed(t.size(), false) {}

    bool free_range(std::size_t from, std::size_t to) const {
        for (std::size_t i = from; i < to; ++i)
            if (claimed[i]) return false;
        return true;
    }

    void claim(EntityType type, std::size_t first, std::size_t last) {
        spans.push_back(EntitySpan{type, tokens[first].begin, tokens[last].end,
                                   SpanSource::Rule});
        for (std::size_t i = first; i <= last; ++i) claimed[i] = true;
    }

    std::string lower(std::size_t i) const { return lowercase_ascii(tokens[i].text); }

    void tag_urls_and_ids() {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (claimed[i]) continue;
            const std::string w = lower(i);
            if (w.rfind("http", 0) == 0 || w.rfind("ftp", 0) == 0 ||
                w.rfind("www.", 0) == 0) {
                claim(EntityType::Url, i, i);
            } else if (w.size() > 3 && w.rfind("10.", 0) == 0 &&
                       std::isdigit(static_cast<unsigned char>(w[3]))) {
                claim(EntityType::Doi, i, i);
            }
        }
        tag_labeled_id("isbn", EntityType::Isbn);
        tag_labeled_id("issn", EntityType::Issn);
    }

    void tag_labeled_id(std::string_view label, EntityType type) {
        for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
            if (claimed[i] || lower(i) != label) continue;
            std::size_t j = i + 1;
            if (j < tokens.size() && tokens[j].text == ":") ++j;
            std::size_t last = j;
            std::size_t count = 0;
            while (last < tokens.size() && !claimed[last] && is_isbn_ish(tokens[last].text)) {
                ++count;
                ++last;
            }
            if (count == 0 || !free_range(i, last)) continue;
            claim(type, i, last - 1);
        }
    }

    // Keyword-anchored volume / number / pages; the keyword is part of the span.
    void tag_keyworded() {
        struct Anchor {
            std::vector<std::string> keywords;
            EntityType type;
            bool allow_range;
        };
        static const std::vector<Anchor> anchors = {
            {{"vol", "volume"}, EntityType::Volume, false},
            {{"no", "num", "number"}, EntityType::Number, false},
            {{"pp", "p", "page", "pages"}, EntityType::Pages, true},
        };
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (claimed[i]) continue;
            const std::string w = lower(i);
            for (const Anchor& anchor : anchors) {
                if (std::find(anchor.keywords.begin(), anchor.keywords.end(), w) ==
                    anchor.keywords.end())
                    continue;
                std::size_t j = i + 1;
                if (j < tokens.size() && tokens[j].text == ".") ++j;
                if (j >= tokens.size() || claimed[j]) break;
                const std::string_view value = tokens[j].text;
                const bool ok = all_digits(value) ||
                                (anchor.allow_range && is_digit_range(value));
                if (ok && free_range(i, j + 1)) claim(anchor.type, i, j);
                break;
            }
        }
    }

    void tag_years_and_months() {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (claimed[i]) continue;
            if (is_year_token(tokens[i].text)) claim(EntityType::Year, i, i);
            else if (lex.is_month(tokens[i].text)) claim(EntityType::Month, i, i);
        }
    }

    void tag_lexicon_sequences(const std::vector<std::vector<std::string>>& entries,
                               EntityType type) {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (claimed[i]) continue;
            std::size_t best_len = 0;
            for (const auto& entry : entries) {
                if (entry.size() <= best_len || i + entry.size() > tokens.size()) continue;
                bool match = true;
                for (std::size_t k = 0; k < entry.size(); ++k) {
                    if (claimed[i + k] || lower(i + k) != entry[k]) {
                        match = false;
                        break;
                    }
                }
                if (match) best_len = entry.size();
            }
            if (best_len > 0) claim(type, i, i + best_len - 1);
        }
    }

    void tag_authors() {
        std::size_t i = 0;
        while (i < tokens.size()) {
            if (claimed[i]) {
                ++i;
                continue;
            }
            // "Surname, I." optionally "Surname, I. J."
            if (is_surname(tokens[i].text) && i + 3 < tokens.size() &&
                tokens[i + 1].text == "," && is_initial(tokens[i + 2].text) &&
                tokens[i + 3].text == ".") {
                std::size_t last = i + 3;
                while (last + 2 < tokens.size() && is_initial(tokens[last + 1].text) &&
                       tokens[last + 2].text == ".")
                    last += 2;
                if (free_range(i, last + 1)) {
                    claim(EntityType::Author, i, last);
                    i = last + 1;
                    continue;
                }
            }
            // "I. Surname" / "I. J. Surname"
            if (is_initial(tokens[i].text) && i + 1 < tokens.size() &&
                tokens[i + 1].text == ".") {
                std::size_t j = i;
                while (j + 2 < tokens.size() && is_initial(tokens[j].text) &&
                       tokens[j + 1].text == ".")
                    j += 2;
                if (j < tokens.size() && j > i && is_surname(tokens[j].text) &&
                    free_range(i, j + 1)) {
                    claim(EntityType::Author, i, j);
                    i = j + 1;
                    continue;
                }
            }
            ++i;
        }
    }

    void tag_quoted_titles() {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (claimed[i] || tokens[i].text != "\"") continue;
            std::size_t close = i + 1;
            while (close < tokens.size() && tokens[close].text != "\"") ++close;
            if (close >= tokens.size() || close == i + 1) continue;
            if (!free_range(i, close + 1)) {
                i = close;
                continue;
            }
            bool has_word = false;
            for (std::size_t k = i + 1; k < close; ++k)
                if (is_word(tokens[k].text)) has_word = true;
            if (has_word) claim(EntityType::Title, i + 1, close - 1);
            i = close;
        }
    }

    // The longest stretch of untagged words between an author-or-year span and
    // a following venue-or-year span.
    void tag_gap_title() {
        if (std::any_of(spans.begin(), spans.end(), [](const EntitySpan& s) {
                return s.type == EntityType::Title;
            }))
            return;

        std::vector<std::size_t> order(spans.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
            return spans[a].begin < spans[b].begin;
        });

        std::size_t best_first = 0, best_last = 0, best_len = 0;
        for (std::size_t oi = 0; oi + 1 < order.size(); ++oi) {
            const EntitySpan& left = spans[order[oi]];
            const EntitySpan& right = spans[order[oi + 1]];
            const bool left_ok = left.type == EntityType::Author || left.type == EntityType::Year;
            const bool right_ok = right.type == EntityType::BooktitleOrJournal ||
                                  right.type == EntityType::Year;
            if (!left_ok || !right_ok) continue;

            // Tokens strictly between the two spans, trimmed of punctuation.
            std::size_t first = 0;
            while (first < tokens.size() && tokens[first].begin < left.end) ++first;
            std::size_t last_limit = first;
            while (last_limit < tokens.size() && tokens[last_limit].end <= right.begin)
                ++last_limit;
            while (first < last_limit && !is_word(tokens[first].text)) ++first;
            std::size_t last = last_limit;
            while (last > first && !is_word(tokens[last - 1].text)) --last;
            if (last - first < 2 || !free_range(first, last)) continue;

            const std::size_t len = tokens[last - 1].end - tokens[first].begin;
            if (len > best_len) {
                best_len = len;
                best_first = first;
                best_last = last - 1;
            }
        }
        if (best_len > 0) claim(EntityType::Title, best_first, best_last);
    }

    std::vector<EntitySpan> run() {
        tag_urls_and_ids();
        tag_keyworded();
        tag_years_and_months();
        tag_lexicon_sequences(lex.venues(), EntityType::BooktitleOrJournal);
        tag_lexicon_sequences(lex.publishers(), EntityType::Publisher);
        tag_authors();
        tag_quoted_titles();
        tag_gap_title();
        std::sort(spans.begin(), spans.end(),
                  [](const EntitySpan& a, const EntitySpan& b) { return a.begin < b.begin; });
        return std::move(spans);
    }
};

}  // namespace

std::vector<EntitySpan> rule_tag(std::string_view text, const LexiconSet& lexicons) {
    const std::vector<Token> tokens = tokenize(text);
    return RuleTagger(tokens, lexicons).run();
}

// ---------------------------------------------------------------------------
// Perceptron tagger

namespace {

constexpr int kOutsideLabel = 0;

int label_count() { return 1 + 2 * static_cast<int>(kEntityTypeCount); }

int begin_label(EntityType type) { return 1 + 2 * static_cast<int>(type); }
int inside_label(EntityType type) { return 2 + 2 * static_cast<int>(type); }

bool is_begin(int label) { return label > 0 && (label - 1) % 2 == 0; }
bool is_inside(int label) { return label > 0 && (label - 1) % 2 == 1; }

EntityType label_type(int label) {
    return static_cast<EntityType>((label - 1) / 2);
}

std::string label_name(int label) {
    if (label == kOutsideLabel) return "O";
    return std::string(is_begin(label) ? "B-" : "I-") +
           std::string(to_string(label_type(label)));
}

std::string word_shape(std::string_view word, bool collapse) {
    std::string shape;
    char last = '\0';
    for (unsigned char c : word) {
        char cls;
        if (std::isupper(c)) cls = 'X';
        else if (std::islower(c)) cls = 'x';
        else if (std::isdigit(c)) cls = 'd';
        else cls = static_cast<char>(c < 0x80 ? c : '?');
        if (collapse && cls == last) continue;
        shape += cls;
        last = cls;
        if (!collapse && shape.size() >= 12) break;
    }
    return shape;
}

std::string case_class(std::string_view word) {
    bool upper = false, lower = false, digit = false, other = false;
    for (unsigned char c : word) {
        if (std::isupper(c)) upper = true;
        else if (std::islower(c)) lower = true;
        else if (std::isdigit(c)) digit = true;
        else other = true;
    }
    if (upper && !lower && !digit && !other) return word.size() == 1 ? "U1" : "UP";
    if (!upper && lower && !digit && !other) return "low";
    if (upper && lower && std::isupper(static_cast<unsigned char>(word[0]))) return "Cap";
    if (digit && !upper && !lower) return other ? "dpunct" : "dig";
    return "mix";
}

std::string digit_class(std::string_view word) {
    if (is_year_token(word)) return "y4";
    if (all_digits(word)) return "d";
    if (is_digit_range(word)) return "rng";
    if (std::any_of(word.begin(), word.end(),
                    [](unsigned char c) { return std::isdigit(c); }))
        return "has";
    return "no";
}

// Context word at offset, with boundary sentinels.
std::string context_word(const std::vector<Token>& tokens, std::ptrdiff_t idx) {
    if (idx < 0) return idx == -1 ? "<s>" : "<s2>";
    if (idx >= static_cast<std::ptrdiff_t>(tokens.size()))
        return idx == static_cast<std::ptrdiff_t>(tokens.size()) ? "</s>" : "</s2>";
    return lowercase_ascii(tokens[static_cast<std::size_t>(idx)].text);
}

void extract_features(const std::vector<Token>& tokens, std::size_t i,
                      const std::string& prev, const std::string& prev2,
                      const LexiconSet& lex, std::vector<std::string>& feats) {
    feats.clear();
    const std::string& word = tokens[i].text;
    const std::string w0 = lowercase_ascii(word);
    const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(i);
    const std::string wm1 = context_word(tokens, idx - 1);
    const std::string wm2 = context_word(tokens, idx - 2);
    const std::string wp1 = context_word(tokens, idx + 1);
    const std::string wp2 = context_word(tokens, idx + 2);

    feats.push_back("b");
    feats.push_back("w0=" + w0);
    feats.push_back("sh=" + word_shape(word, false));
    feats.push_back("csh=" + word_shape(word, true));
    feats.push_back("cc=" + case_class(word));
    feats.push_back("dc=" + digit_class(word));
    if (word.size() >= 3) {
        feats.push_back("p3=" + w0.substr(0, 3));
        feats.push_back("s3=" + w0.substr(w0.size() - 3));
    }
    if (word.size() >= 4) {
        feats.push_back("p4=" + w0.substr(0, 4));
        feats.push_back("s4=" + w0.substr(w0.size() - 4));
    }
    if (lex.in_venue_vocab(word)) feats.push_back("lxV");
    if (lex.is_month(word)) feats.push_back("lxM");
    if (lex.in_publisher_vocab(word)) feats.push_back("lxP");
    feats.push_back("w-1=" + wm1);
    feats.push_back("w-2=" + wm2);
    feats.push_back("w+1=" + wp1);
    feats.push_back("w+2=" + wp2);
    feats.push_back("w-1w0=" + wm1 + "|" + w0);
    feats.push_back("w0w+1=" + w0 + "|" + wp1);
    feats.push_back("t-1=" + prev);
    feats.push_back("t-2t-1=" + prev2 + "|" + prev);
    feats.push_back("t-1w0=" + prev + "|" + w0);
}

struct TrainingExample {
    std::vector<Token> tokens;
    std::vector<int> labels;
};

// Spans snapped outward to token boundaries; returns true if snapping moved
// an offset.
bool spans_to_bio(const std::vector<Token>& tokens, const std::vector<EntitySpan>& spans,
                  std::vector<int>& labels) {
    labels.assign(tokens.size(), kOutsideLabel);
    bool snapped = false;
    for (const EntitySpan& span : spans) {
        bool first = true;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (tokens[i].end <= span.begin || tokens[i].begin >= span.end) continue;
            if (tokens[i].begin < span.begin || tokens[i].end > span.end) snapped = true;
            labels[i] = first ? begin_label(span.type) : inside_label(span.type);
            first = false;
        }
    }
    return snapped;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t hash = 1469598103934665603ull) {
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::uint64_t hash_corpus(const std::vector<AnnotatedComment>& corpus) {
    std::uint64_t hash = 1469598103934665603ull;
    for (const auto& comment : corpus) {
        hash = fnv1a(comment.text, hash);
        for (const auto& span : comment.gold) {
            hash = fnv1a(to_string(span.type), hash);
            hash ^= span.begin * 1099511628211ull + span.end;
            hash *= 1099511628211ull;
        }
    }
    return hash;
}

// Dense per-label weight rows with averaging bookkeeping.
struct WeightRow {
    std::vector<double> weights;
    std::vector<double> totals;
    std::vector<std::uint64_t> stamps;

    explicit WeightRow(int labels)
        : weights(labels, 0.0), totals(labels, 0.0), stamps(labels, 0) {}
};

}  // namespace

TaggerModel::TaggerModel(WeightMap weights, LexiconSet lexicons, int epochs,
                         std::uint64_t seed, std::uint64_t corpus_hash)
    : weights_(std::move(weights)),
      lexicons_(std::move(lexicons)),
      epochs_(epochs),
      seed_(seed),
      corpus_hash_(corpus_hash) {}

TaggerModel train(const std::vector<AnnotatedComment>& corpus, int epochs,
                  std::uint64_t seed, const LexiconSet& lexicons) {
    if (corpus.empty()) throw EmptyCorpus("train: empty annotation corpus");
    if (epochs < 1) throw DataError("train: epochs must be >= 1");

    std::vector<TrainingExample> examples;
    examples.reserve(corpus.size());
    std::size_t snapped_count = 0;
    bool any_entity = false;
    for (const auto& comment : corpus) {
        TrainingExample ex;
        ex.tokens = tokenize(comment.text);
        if (ex.tokens.empty() && !comment.gold.empty())
            throw DataError("train: annotated comment tokenizes to nothing");
        if (spans_to_bio(ex.tokens, comment.gold, ex.labels)) ++snapped_count;
        for (int label : ex.labels)
            if (label != kOutsideLabel) any_entity = true;
        examples.push_back(std::move(ex));
    }
    if (!any_entity)
        throw DegenerateCorpus("train: every token is labeled O; nothing to learn");
    if (snapped_count > 0)
        log_warn("train: snapped misaligned gold spans in " +
                 std::to_string(snapped_count) + " comment(s)");

    const int n_labels = label_count();
    std::unordered_map<std::string, WeightRow> rows;
    rows.reserve(1 << 16);
    std::uint64_t now = 0;

    auto update = [&](const std::string& feature, int label, double delta) {
        auto [it, inserted] = rows.try_emplace(feature, n_labels);
        WeightRow& row = it->second;
        row.totals[label] += (now - row.stamps[label]) * row.weights[label];
        row.stamps[label] = now;
        row.weights[label] += delta;
    };

    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::mt19937_64 rng(seed);
    std::vector<std::string> feats;
    std::vector<double> scores(n_labels);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[static_cast<std::size_t>(bounded_draw(rng, i))]);

        for (std::size_t idx : order) {
            const TrainingExample& ex = examples[idx];
            std::string prev = "<t1>", prev2 = "<t2>";
            for (std::size_t i = 0; i < ex.tokens.size(); ++i) {
                extract_features(ex.tokens, i, prev, prev2, lexicons, feats);
                std::fill(scores.begin(), scores.end(), 0.0);
                for (const auto& f : feats) {
                    const auto it = rows.find(f);
                    if (it == rows.end()) continue;
                    for (int l = 0; l < n_labels; ++l) scores[l] += it->second.weights[l];
                }
                int pred = 0;
                for (int l = 1; l < n_labels; ++l)
                    if (scores[l] > scores[pred]) pred = l;

                ++now;
                const int gold = ex.labels[i];
                if (pred != gold) {
                    for (const auto& f : feats) {
                        update(f, gold, 1.0);
                        update(f, pred, -1.0);
                    }
                }
                prev2 = prev;
                prev = label_name(pred);
            }
        }
    }

    // Averaged weights; zero entries dropped.
    TaggerModel::WeightMap averaged;
    for (auto& [feature, row] : rows) {
        std::map<int, double> labels_out;
        for (int l = 0; l < n_labels; ++l) {
            const double total = row.totals[l] + (now - row.stamps[l]) * row.weights[l];
            if (total != 0.0)
                labels_out[l] = total / static_cast<double>(now);
        }
        if (!labels_out.empty()) averaged[feature] = std::move(labels_out);
    }

    return TaggerModel(std::move(averaged), lexicons, epochs, seed, hash_corpus(corpus));
}

std::vector<EntitySpan> tag(const TaggerModel& model, std::string_view text) {
    const std::vector<Token> tokens = tokenize(text);
    if (tokens.empty()) return {};
    const int n_labels = label_count();

    std::vector<int> labels(tokens.size(), kOutsideLabel);
    std::vector<std::string> feats;
    std::vector<double> scores(n_labels);
    std::string prev = "<t1>", prev2 = "<t2>";
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        extract_features(tokens, i, prev, prev2, model.lexicons(), feats);
        std::fill(scores.begin(), scores.end(), 0.0);
        for (const auto& f : feats) {
            const auto it = model.weights().find(f);
            if (it == model.weights().end()) continue;
            for (const auto& [label, weight] : it->second) scores[label] += weight;
        }
        int pred = 0;
        for (int l = 1; l < n_labels; ++l)
            if (scores[l] > scores[pred]) pred = l;
        labels[i] = pred;
        prev2 = prev;
        prev = label_name(pred);
    }

    // BIO decode; an I- continuing nothing (or the wrong type) opens a span.
    std::vector<EntitySpan> spans;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (labels[i] == kOutsideLabel) continue;
        const EntityType type = label_type(labels[i]);
        std::size_t last = i;
        while (last + 1 < tokens.size() && is_inside(labels[last + 1]) &&
               label_type(labels[last + 1]) == type)
            ++last;
        spans.push_back(EntitySpan{type, tokens[i].begin, tokens[last].end,
                                   SpanSource::Model});
        i = last;
    }
    return spans;
}

std::vector<EntitySpan> merge_spans(std::vector<EntitySpan> model_spans,
                                    std::vector<EntitySpan> rule_spans) {
    auto by_begin = [](const EntitySpan& a, const EntitySpan& b) {
        return a.begin < b.begin;
    };
    std::sort(model_spans.begin(), model_spans.end(), by_begin);
    std::sort(rule_spans.begin(), rule_spans.end(), by_begin);

    std::vector<EntitySpan> merged = model_spans;
    for (const EntitySpan& rule : rule_spans) {
        const bool overlaps = std::any_of(
            merged.begin(), merged.end(), [&rule](const EntitySpan& s) {
                return s.begin < rule.end && rule.begin < s.end;
            });
        if (!overlaps) merged.push_back(rule);
    }
    std::sort(merged.begin(), merged.end(), by_begin);
    return merged;
}

std::vector<EntitySpan> tag_with_rules(const TaggerModel& model, std::string_view text) {
    return merge_spans(tag(model, text), rule_tag(text, model.lexicons()));
}

// ---------------------------------------------------------------------------
// Model serialization

namespace {
constexpr int kModelVersion = 1;
constexpr const char* kModelFormat = "citescan-tagger";

nlohmann::json lexicons_to_json(const LexiconSet& lex) {
    auto join = [](const std::vector<std::string>& words) {
        std::string out;
        for (const auto& w : words) {
            if (!out.empty()) out += ' ';
            out += w;
        }
        return out;
    };
    nlohmann::json out;
    auto venues = nlohmann::json::array();
    for (const auto& entry : lex.venues()) venues.push_back(join(entry));
    out["venues"] = std::move(venues);
    auto publishers = nlohmann::json::array();
    for (const auto& entry : lex.publishers()) publishers.push_back(join(entry));
    out["publishers"] = std::move(publishers);
    auto months = nlohmann::json::array();
    std::vector<std::string> sorted_months;
    for (const char* name :
         {"january", "february", "march", "april", "may", "june", "july", "august",
          "september", "october", "november", "december", "jan", "feb", "mar", "apr",
          "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec"})
        if (lex.is_month(name)) sorted_months.push_back(name);
    for (const auto& m : sorted_months) months.push_back(m);
    out["months"] = std::move(months);
    return out;
}

LexiconSet lexicons_from_json(const nlohmann::json& obj) {
    LexiconSet lex;
    for (const auto& entry : obj.value("venues", nlohmann::json::array()))
        lex.add_venue(entry.get<std::string>());
    for (const auto& entry : obj.value("publishers", nlohmann::json::array()))
        lex.add_publisher(entry.get<std::string>());
    for (const auto& entry : obj.value("months", nlohmann::json::array()))
        lex.add_month(entry.get<std::string>());
    return lex;
}

}  // namespace

std::string TaggerModel::serialize() const {
    nlohmann::json out;
    out["format"] = kModelFormat;
    out["version"] = kModelVersion;
    out["epochs"] = epochs_;
    out["seed"] = seed_;
    out["corpus_hash"] = corpus_hash_;
    out["labels"] = [] {
        auto labels = nlohmann::json::array();
        for (int l = 0; l < label_count(); ++l) labels.push_back(label_name(l));
        return labels;
    }();
    nlohmann::json weights = nlohmann::json::object();
    for (const auto& [feature, labels] : weights_) {
        nlohmann::json row = nlohmann::json::object();
        for (const auto& [label, weight] : labels)
            row[std::to_string(label)] = weight;
        weights[feature] = std::move(row);
    }
    out["weights"] = std::move(weights);
    out["lexicons"] = lexicons_to_json(lexicons_);
    return out.dump();
}

TaggerModel TaggerModel::deserialize(std::string_view data) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(data);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
    if (obj.value("format", "") != kModelFormat)
        throw ParseError("model: not a tagger model file");
    if (obj.value("version", -1) != kModelVersion)
        throw ParseError("model: unsupported version " +
                         std::to_string(obj.value("version", -1)));
    WeightMap weights;
    for (const auto& [feature, row] : obj.at("weights").items()) {
        std::map<int, double> labels;
        for (const auto& [label, weight] : row.items())
            labels[std::stoi(label)] = weight.get<double>();
        weights[feature] = std::move(labels);
    }
    return TaggerModel(std::move(weights), lexicons_from_json(obj.value("lexicons", nlohmann::json::object())),
                       obj.value("epochs", 0), obj.value("seed", std::uint64_t{0}),
                       obj.value("corpus_hash", std::uint64_t{0}));
}

void TaggerModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << serialize();
}

TaggerModel TaggerModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize(buffer.str());
}

}  // namespace citescan
