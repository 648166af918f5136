#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "citescan/comment_extract.hpp"
#include "citescan/detect.hpp"

namespace citescan {

struct Histogram {
    std::map<std::string, std::uint64_t> buckets;
    std::uint64_t total = 0;
};

// Buckets detected comments by how many citation records they carry.
Histogram citations_per_comment(const std::vector<DetectedComment>& results);

// Case fold, collapse whitespace, strip trailing punctuation.
std::string normalize_title(std::string_view title);

struct TitleCount {
    std::string title;  // normalized
    std::uint64_t count = 0;
    std::map<Language, std::uint64_t> per_language;
};

// Titles counted per record, filtered by min_count, sorted by count then text.
std::vector<TitleCount> top_titles(const std::vector<DetectedComment>& results,
                                   std::uint64_t min_count);

// Distinct publications (normalized titles) per venue; a title counts toward
// its most frequent venue.
std::vector<std::pair<std::string, std::uint64_t>> venue_frequency(
    const std::vector<DetectedComment>& results, std::uint64_t min_count);

// Decade buckets with "<1950" and "unknown" catch-alls.
Histogram decade_histogram(const std::vector<DetectedComment>& results);

std::map<Language, std::uint64_t> per_language_counts(const std::vector<DetectedComment>& results);

struct SearchResult {
    std::uint64_t total_matches = 0;     // occurrences, duplicates included
    std::uint64_t distinct_matches = 0;  // distinct normalized texts
    std::vector<std::string> variants;
};

// Case-insensitive substring search; occurrence counts include duplicates.
SearchResult search_title(const std::vector<NormalizedComment>& corpus,
                          std::string_view query);

enum class ReportFormat { Csv, Markdown, Json };

struct ReportOptions {
    ReportFormat format = ReportFormat::Markdown;
    std::uint64_t title_min_count = 1;
    std::uint64_t venue_min_count = 1;
};

// The full analytics bundle over one detections file.
void write_report(std::ostream& out, const std::vector<DetectedComment>& results,
                  const ReportOptions& options = {});

}  // namespace citescan
