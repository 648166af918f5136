#include "citescan/detect.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "citescan/errors.hpp"
#include "citescan/utf8.hpp"

namespace citescan {

std::size_t largest_gap(std::vector<EntitySpan> spans) {
    if (spans.empty()) throw EmptySpans();
    std::sort(spans.begin(), spans.end(),
              [](const EntitySpan& a, const EntitySpan& b) { return a.begin < b.begin; });
    std::size_t max_gap = 0;
    for (std::size_t i = 0; i + 1 < spans.size(); ++i) {
        if (spans[i + 1].begin > spans[i].end)
            max_gap = std::max(max_gap, spans[i + 1].begin - spans[i].end);
    }
    return max_gap;
}

namespace {

CitationRecord build_record(const std::vector<EntitySpan>& spans, std::string_view text) {
    CitationRecord record;
    record.begin = spans.front().begin;
    record.end = spans.front().end;
    record.span_count = spans.size();
    auto fill = [](std::optional<std::string>& slot, std::string value) {
        if (!slot) slot = std::move(value);
    };
    for (const EntitySpan& span : spans) {
        record.begin = std::min(record.begin, span.begin);
        record.end = std::max(record.end, span.end);
        std::string value = utf8::slice(text, span.begin, span.end);
        switch (span.type) {
            case EntityType::Author: record.authors.push_back(std::move(value)); break;
            case EntityType::Title: fill(record.title, std::move(value)); break;
            case EntityType::BooktitleOrJournal: fill(record.venue, std::move(value)); break;
            case EntityType::Year: fill(record.year, std::move(value)); break;
            case EntityType::Volume: fill(record.volume, std::move(value)); break;
            case EntityType::Number: fill(record.number, std::move(value)); break;
            case EntityType::Pages: fill(record.pages, std::move(value)); break;
            case EntityType::Month: fill(record.month, std::move(value)); break;
            case EntityType::Publisher: fill(record.publisher, std::move(value)); break;
            case EntityType::Address: fill(record.address, std::move(value)); break;
            case EntityType::Doi: fill(record.doi, std::move(value)); break;
            case EntityType::Isbn: fill(record.isbn, std::move(value)); break;
            case EntityType::Issn: fill(record.issn, std::move(value)); break;
            case EntityType::Url: fill(record.url, std::move(value)); break;
        }
    }
    return record;
}

std::size_t distinct_types(const std::vector<EntitySpan>& spans) {
    EntityTypeSet set;
    for (const EntitySpan& span : spans) set.insert(span.type);
    return set.size();
}

}  // namespace

std::vector<CitationRecord> segment_citations(const std::vector<EntitySpan>& spans,
                                              std::string_view text) {
    if (spans.empty()) return {};
    std::vector<EntitySpan> ordered = spans;
    std::sort(ordered.begin(), ordered.end(),
              [](const EntitySpan& a, const EntitySpan& b) { return a.begin < b.begin; });

    std::vector<std::vector<EntitySpan>> groups;
    std::vector<EntitySpan> current;
    EntityTypeSet seen;
    for (const EntitySpan& span : ordered) {
        if (span.type != EntityType::Author && seen.contains(span.type)) {
            groups.push_back(std::move(current));
            current.clear();
            seen = {};
        }
        current.push_back(span);
        if (span.type != EntityType::Author) seen.insert(span.type);
    }
    // A trailing fragment with fewer than two distinct types rides along with
    // the previous citation rather than standing alone.
    if (!groups.empty() && distinct_types(current) < 2) {
        auto& back = groups.back();
        back.insert(back.end(), current.begin(), current.end());
    } else {
        groups.push_back(std::move(current));
    }

    std::vector<CitationRecord> records;
    records.reserve(groups.size());
    for (const auto& group : groups) records.push_back(build_record(group, text));
    return records;
}

DetectionResult detect(std::string_view text, const std::vector<EntitySpan>& spans,
                       const DetectionCriterion& criterion) {
    DetectionResult result;
    EntityTypeSet present;
    for (const EntitySpan& span : spans) present.insert(span.type);

    result.largest_gap = spans.empty() ? 0 : largest_gap(spans);
    if (!present.contains_all(criterion.required_types)) {
        result.reason = DetectReason::MissingTypes;
        return result;
    }
    if (criterion.max_gap >= 0 &&
        result.largest_gap > static_cast<std::size_t>(criterion.max_gap)) {
        result.reason = DetectReason::GapExceeded;
        return result;
    }
    result.detected = true;
    result.reason = DetectReason::Ok;
    result.records = segment_citations(spans, text);
    return result;
}

// ---------------------------------------------------------------------------
// Pattern baseline

namespace {

bool all_digits_sv(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c);
    });
}

bool baseline_surname(std::string_view s) {
    if (s.size() < 2 || !std::isupper(static_cast<unsigned char>(s[0]))) return false;
    bool lower = false;
    for (char c : s.substr(1)) {
        const unsigned char uc = static_cast<unsigned char>(c);
        if (std::islower(uc)) lower = true;
        else if (!std::isupper(uc) && c != '\'' && c != '-') return false;
    }
    return lower;
}

bool baseline_year(std::string_view s) {
    if (s.size() != 4 || !all_digits_sv(s)) return false;
    const int value = std::stoi(std::string(s));
    return value >= 1900 && value <= 2029;
}

bool baseline_range(std::string_view s) {
    const std::size_t dash = s.find('-');
    if (dash == std::string_view::npos || dash == 0 || dash + 1 >= s.size()) return false;
    return all_digits_sv(s.substr(0, dash)) && all_digits_sv(s.substr(dash + 1));
}

}  // namespace

bool baseline_detect(std::string_view text) {
    const std::vector<Token> tokens = tokenize(text);
    bool surname = false, year = false, volume = false, page = false;

    auto lower_at = [&tokens](std::size_t i) {
        std::string out = tokens[i].text;
        std::transform(out.begin(), out.end(), out.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return out;
    };
    auto keyword_before = [&](std::size_t i, std::initializer_list<const char*> words) {
        std::size_t k = i;
        if (k > 0 && tokens[k - 1].text == ".") --k;
        if (k == 0) return false;
        const std::string w = lower_at(k - 1);
        return std::find_if(words.begin(), words.end(), [&w](const char* cand) {
                   return w == cand;
               }) != words.end();
    };

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string_view t = tokens[i].text;
        if (baseline_surname(t)) surname = true;
        if (baseline_year(t)) year = true;
        if (baseline_range(t)) page = true;
        if (all_digits_sv(t)) {
            if (keyword_before(i, {"vol", "volume"})) volume = true;
            if (keyword_before(i, {"p", "pp", "page", "pages"})) page = true;
            if (!baseline_year(t) && i > 0 && i + 1 < tokens.size() &&
                tokens[i - 1].text == "(" && tokens[i + 1].text == ")")
                volume = true;
        }
    }
    return surname && year && volume && page;
}

// ---------------------------------------------------------------------------
// BibTeX export

namespace {

std::string alpha_lower(std::string_view text) {
    std::string out;
    for (char c : text) {
        const unsigned char uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) out += static_cast<char>(std::tolower(uc));
    }
    return out;
}

std::string key_surname(const CitationRecord& record) {
    if (record.authors.empty()) return {};
    const std::string& author = record.authors.front();
    const std::size_t comma = author.find(',');
    if (comma != std::string::npos) return alpha_lower(author.substr(0, comma));
    // "D. Knuth" style: take the last word.
    const std::size_t space = author.find_last_of(' ');
    return alpha_lower(space == std::string::npos ? author : author.substr(space + 1));
}

std::string key_year(const CitationRecord& record) {
    if (!record.year) return {};
    std::string digits;
    for (char c : *record.year)
        if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
    return digits.size() >= 4 ? digits.substr(0, 4) : digits;
}

std::string key_title_word(const CitationRecord& record) {
    if (!record.title) return {};
    for (const Token& token : tokenize(*record.title)) {
        const std::string word = alpha_lower(token.text);
        if (!word.empty()) return word;
    }
    return {};
}

std::string escape_bibtex(std::string_view value) {
    std::string out;
    out.reserve(value.size());
    for (char c : value) {
        if (c == '{' || c == '}') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string BibtexExporter::entry(const CitationRecord& record) {
    std::string key = key_surname(record) + key_year(record) + key_title_word(record);
    if (key.empty()) key = "ref";
    std::string unique = key;
    for (int n = 2; used_keys_.count(unique) > 0; ++n)
        unique = key + "-" + std::to_string(n);
    used_keys_.insert(unique);

    std::string out = "@misc{" + unique + ",\n";
    auto field = [&out](const char* name, const std::optional<std::string>& value) {
        if (value) out += "  " + std::string(name) + " = {" + escape_bibtex(*value) + "},\n";
    };
    if (!record.authors.empty()) {
        std::string joined;
        for (const auto& author : record.authors) {
            if (!joined.empty()) joined += " and ";
            joined += author;
        }
        out += "  author = {" + escape_bibtex(joined) + "},\n";
    }
    field("title", record.title);
    field("journal", record.venue);
    field("year", record.year);
    field("volume", record.volume);
    field("number", record.number);
    field("pages", record.pages);
    field("month", record.month);
    field("publisher", record.publisher);
    field("address", record.address);
    field("doi", record.doi);
    field("isbn", record.isbn);
    field("issn", record.issn);
    field("url", record.url);
    if (out.size() >= 2 && out[out.size() - 2] == ',') out.erase(out.size() - 2, 1);
    out += "}\n";
    return out;
}

std::string to_bibtex(const CitationRecord& record) {
    return BibtexExporter().entry(record);
}

// ---------------------------------------------------------------------------
// Pipeline application

std::vector<DetectedComment> run_detection(const std::vector<NormalizedComment>& comments,
                                           const TaggerModel& model,
                                           const DetectionCriterion& criterion,
                                           bool use_rules, int jobs) {
    std::vector<std::optional<DetectedComment>> slots(comments.size());

    auto process = [&](std::size_t i) {
        const NormalizedComment& comment = comments[i];
        const auto spans = use_rules ? tag_with_rules(model, comment.text)
                                     : tag(model, comment.text);
        DetectionResult result = detect(comment.text, spans, criterion);
        if (result.detected)
            slots[i] = DetectedComment{comment.language, comment.text,
                                       result.largest_gap, std::move(result.records)};
    };

    if (jobs <= 1 || comments.size() < 2) {
        for (std::size_t i = 0; i < comments.size(); ++i) process(i);
    } else {
        const std::size_t workers =
            std::min<std::size_t>(static_cast<std::size_t>(jobs), comments.size());
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < comments.size(); i += workers) process(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    std::vector<DetectedComment> detections;
    for (auto& slot : slots)
        if (slot) detections.push_back(std::move(*slot));
    return detections;
}

// ---------------------------------------------------------------------------
// Detections JSONL

namespace {

nlohmann::json record_to_json(const CitationRecord& record) {
    nlohmann::json obj;
    obj["authors"] = record.authors;
    auto put = [&obj](const char* name, const std::optional<std::string>& value) {
        if (value) obj[name] = *value;
    };
    put("title", record.title);
    put("venue", record.venue);
    put("year", record.year);
    put("volume", record.volume);
    put("number", record.number);
    put("pages", record.pages);
    put("month", record.month);
    put("publisher", record.publisher);
    put("address", record.address);
    put("doi", record.doi);
    put("isbn", record.isbn);
    put("issn", record.issn);
    put("url", record.url);
    obj["span"] = {{"begin", record.begin}, {"end", record.end}};
    return obj;
}

CitationRecord record_from_json(const nlohmann::json& obj) {
    CitationRecord record;
    for (const auto& author : obj.value("authors", nlohmann::json::array()))
        record.authors.push_back(author.get<std::string>());
    auto get = [&obj](const char* name) -> std::optional<std::string> {
        if (obj.contains(name)) return obj.at(name).get<std::string>();
        return std::nullopt;
    };
    record.title = get("title");
    record.venue = get("venue");
    record.year = get("year");
    record.volume = get("volume");
    record.number = get("number");
    record.pages = get("pages");
    record.month = get("month");
    record.publisher = get("publisher");
    record.address = get("address");
    record.doi = get("doi");
    record.isbn = get("isbn");
    record.issn = get("issn");
    record.url = get("url");
    if (obj.contains("span")) {
        record.begin = obj["span"].value("begin", std::uint64_t{0});
        record.end = obj["span"].value("end", std::uint64_t{0});
    }
    return record;
}

}  // namespace

void write_detections_jsonl(std::ostream& out, const std::vector<DetectedComment>& detections) {
    for (const auto& detection : detections) {
        nlohmann::json obj;
        obj["lang"] = std::string(to_string(detection.language));
        obj["text"] = detection.text;
        obj["largest_gap"] = detection.largest_gap;
        auto records = nlohmann::json::array();
        for (const auto& record : detection.records) records.push_back(record_to_json(record));
        obj["records"] = std::move(records);
        out << obj.dump() << '\n';
    }
}

std::vector<DetectedComment> read_detections_jsonl(std::istream& in) {
    std::vector<DetectedComment> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("detections line " + std::to_string(line_no) + ": " + e.what());
        }
        DetectedComment detection;
        const auto language = language_from_string(obj.value("lang", ""));
        if (!language)
            throw ParseError("detections line " + std::to_string(line_no) + ": unknown lang");
        detection.language = *language;
        detection.text = obj.value("text", "");
        detection.largest_gap = obj.value("largest_gap", std::uint64_t{0});
        for (const auto& rec : obj.value("records", nlohmann::json::array()))
            detection.records.push_back(record_from_json(rec));
        out.push_back(std::move(detection));
    }
    return out;
}

std::vector<DetectedComment> load_detections_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_detections_jsonl(in);
}

void save_detections_jsonl(const std::string& path,
                           const std::vector<DetectedComment>& detections) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_detections_jsonl(out, detections);
}

}  // namespace citescan
