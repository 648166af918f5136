#include "citescan/report.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

namespace citescan {

namespace {

std::string lowercase_ascii(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_trailing_punct(char c) {
    switch (c) {
        case '.': case ',': case ';': case ':': case '!': case '?':
        case '\'': case '"': case '`': case ')': case ']':
            return true;
        default:
            return false;
    }
}

std::optional<int> parse_year(const std::string& text) {
    for (std::size_t i = 0; i + 4 <= text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
        std::size_t j = i;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        if (j - i == 4) return std::stoi(text.substr(i, 4));
        i = j;
    }
    return std::nullopt;
}

}  // namespace

std::string normalize_title(std::string_view title) {
    std::string lowered = lowercase_ascii(title);
    std::string collapsed;
    collapsed.reserve(lowered.size());
    bool in_space = true;
    for (char c : lowered) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !collapsed.empty()) collapsed += ' ';
        in_space = false;
        collapsed += c;
    }
    while (!collapsed.empty() && is_trailing_punct(collapsed.back())) collapsed.pop_back();
    while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
    return collapsed;
}

Histogram citations_per_comment(const std::vector<DetectedComment>& results) {
    Histogram histogram;
    for (const auto& result : results) {
        ++histogram.buckets[std::to_string(result.records.size())];
        ++histogram.total;
    }
    return histogram;
}

std::vector<TitleCount> top_titles(const std::vector<DetectedComment>& results,
                                   std::uint64_t min_count) {
    std::map<std::string, TitleCount> counts;
    for (const auto& result : results) {
        for (const auto& record : result.records) {
            if (!record.title) continue;
            const std::string key = normalize_title(*record.title);
            if (key.empty()) continue;
            TitleCount& entry = counts[key];
            entry.title = key;
            ++entry.count;
            ++entry.per_language[result.language];
        }
    }
    std::vector<TitleCount> out;
    for (auto& [key, entry] : counts)
        if (entry.count >= min_count) out.push_back(std::move(entry));
    std::sort(out.begin(), out.end(), [](const TitleCount& a, const TitleCount& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.title < b.title;
    });
    return out;
}

std::vector<std::pair<std::string, std::uint64_t>> venue_frequency(
    const std::vector<DetectedComment>& results, std::uint64_t min_count) {
    // Publication identity is the normalized title; each publication counts
    // toward its most frequent venue spelling.
    std::map<std::string, std::map<std::string, std::uint64_t>> title_venues;
    for (const auto& result : results) {
        for (const auto& record : result.records) {
            if (!record.title || !record.venue) continue;
            const std::string title = normalize_title(*record.title);
            const std::string venue = normalize_title(*record.venue);
            if (title.empty() || venue.empty()) continue;
            ++title_venues[title][venue];
        }
    }
    std::map<std::string, std::uint64_t> venue_titles;
    for (const auto& [title, venues] : title_venues) {
        auto best = venues.begin();
        for (auto it = venues.begin(); it != venues.end(); ++it)
            if (it->second > best->second) best = it;
        ++venue_titles[best->first];
    }
    std::vector<std::pair<std::string, std::uint64_t>> out;
    for (const auto& [venue, count] : venue_titles)
        if (count >= min_count) out.emplace_back(venue, count);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

Histogram decade_histogram(const std::vector<DetectedComment>& results) {
    Histogram histogram;
    for (const auto& result : results) {
        for (const auto& record : result.records) {
            std::string bucket = "unknown";
            if (record.year) {
                if (const auto year = parse_year(*record.year)) {
                    bucket = *year < 1950 ? "<1950"
                                          : std::to_string(*year / 10 * 10);
                }
            }
            ++histogram.buckets[bucket];
            ++histogram.total;
        }
    }
    return histogram;
}

std::map<Language, std::uint64_t> per_language_counts(
    const std::vector<DetectedComment>& results) {
    std::map<Language, std::uint64_t> counts;
    for (const auto& result : results) ++counts[result.language];
    return counts;
}

SearchResult search_title(const std::vector<NormalizedComment>& corpus,
                          std::string_view query) {
    SearchResult result;
    const std::string needle = lowercase_ascii(query);
    for (const auto& comment : corpus) {
        if (lowercase_ascii(comment.text).find(needle) == std::string::npos) continue;
        result.total_matches += comment.occurrences;
        ++result.distinct_matches;
        result.variants.push_back(comment.text);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Report rendering

namespace {

void write_csv(std::ostream& out, const std::vector<DetectedComment>& results,
               const ReportOptions& options) {
    out << "section,key,count,detail\n";
    for (const auto& [language, count] : per_language_counts(results))
        out << "per_language," << to_string(language) << ',' << count << ",\n";
    const Histogram citations = citations_per_comment(results);
    for (const auto& [bucket, count] : citations.buckets)
        out << "citations_per_comment," << bucket << ',' << count << ",\n";
    const Histogram decades = decade_histogram(results);
    for (const auto& [bucket, count] : decades.buckets)
        out << "decade," << bucket << ',' << count << ",\n";
    for (const auto& title : top_titles(results, options.title_min_count)) {
        out << "title,\"" << title.title << "\"," << title.count << ",\"";
        bool first = true;
        for (const auto& [language, count] : title.per_language) {
            if (!first) out << ' ';
            out << to_string(language) << ':' << count;
            first = false;
        }
        out << "\"\n";
    }
    for (const auto& [venue, count] : venue_frequency(results, options.venue_min_count))
        out << "venue,\"" << venue << "\"," << count << ",\n";
}

void write_markdown(std::ostream& out, const std::vector<DetectedComment>& results,
                    const ReportOptions& options) {
    out << "# Citation report\n\n";
    out << "Detected comments: " << results.size() << "\n\n";

    out << "## Detections per language\n\n| language | comments |\n|---|---|\n";
    for (const auto& [language, count] : per_language_counts(results))
        out << "| " << to_string(language) << " | " << count << " |\n";

    out << "\n## Citations per comment\n\n| citations | comments |\n|---|---|\n";
    for (const auto& [bucket, count] : citations_per_comment(results).buckets)
        out << "| " << bucket << " | " << count << " |\n";

    out << "\n## Citations per decade\n\n| decade | citations |\n|---|---|\n";
    for (const auto& [bucket, count] : decade_histogram(results).buckets)
        out << "| " << bucket << " | " << count << " |\n";

    out << "\n## Top titles (>= " << options.title_min_count << ")\n\n"
        << "| title | count | per language |\n|---|---|---|\n";
    for (const auto& title : top_titles(results, options.title_min_count)) {
        out << "| " << title.title << " | " << title.count << " | ";
        bool first = true;
        for (const auto& [language, count] : title.per_language) {
            if (!first) out << ", ";
            out << to_string(language) << ' ' << count;
            first = false;
        }
        out << " |\n";
    }

    out << "\n## Venues (>= " << options.venue_min_count << " publications)\n\n"
        << "| venue | publications |\n|---|---|\n";
    for (const auto& [venue, count] : venue_frequency(results, options.venue_min_count))
        out << "| " << venue << " | " << count << " |\n";
}

void write_json(std::ostream& out, const std::vector<DetectedComment>& results,
                const ReportOptions& options) {
    nlohmann::json obj;
    obj["detected_comments"] = results.size();
    for (const auto& [language, count] : per_language_counts(results))
        obj["per_language"][std::string(to_string(language))] = count;
    obj["citations_per_comment"] = citations_per_comment(results).buckets;
    obj["decades"] = decade_histogram(results).buckets;
    auto titles = nlohmann::json::array();
    for (const auto& title : top_titles(results, options.title_min_count)) {
        nlohmann::json entry;
        entry["title"] = title.title;
        entry["count"] = title.count;
        for (const auto& [language, count] : title.per_language)
            entry["per_language"][std::string(to_string(language))] = count;
        titles.push_back(std::move(entry));
    }
    obj["titles"] = std::move(titles);
    auto venues = nlohmann::json::array();
    for (const auto& [venue, count] : venue_frequency(results, options.venue_min_count))
        venues.push_back({{"venue", venue}, {"publications", count}});
    obj["venues"] = std::move(venues);
    out << obj.dump(2) << '\n';
}

}  // namespace

void write_report(std::ostream& out, const std::vector<DetectedComment>& results,
                  const ReportOptions& options) {
    switch (options.format) {
        case ReportFormat::Csv: write_csv(out, results, options); break;
        case ReportFormat::Markdown: write_markdown(out, results, options); break;
        case ReportFormat::Json: write_json(out, results, options); break;
    }
}

}  // namespace citescan
