#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "citescan/comment_extract.hpp"
#include "citescan/ner.hpp"
#include "citescan/types.hpp"

namespace citescan {

// A comment contains a citation when every required entity type is present
// and the largest gap between consecutive entity spans is at most max_gap.
struct DetectionCriterion {
    EntityTypeSet required_types{EntityType::Author, EntityType::Title,
                                 EntityType::Year, EntityType::BooktitleOrJournal};
    int max_gap = 10;
};

struct CitationRecord {
    std::vector<std::string> authors;
    std::optional<std::string> title;
    std::optional<std::string> venue;
    std::optional<std::string> year;
    std::optional<std::string> volume;
    std::optional<std::string> number;
    std::optional<std::string> pages;
    std::optional<std::string> month;
    std::optional<std::string> publisher;
    std::optional<std::string> address;
    std::optional<std::string> doi;
    std::optional<std::string> isbn;
    std::optional<std::string> issn;
    std::optional<std::string> url;
    std::size_t begin = 0;  // scalar span covering all member entity spans
    std::size_t end = 0;
    std::size_t span_count = 0;  // entity spans folded into this record
};

enum class DetectReason : std::uint8_t { Ok, MissingTypes, GapExceeded };

struct DetectionResult {
    bool detected = false;
    std::vector<CitationRecord> records;
    std::size_t largest_gap = 0;
    DetectReason reason = DetectReason::MissingTypes;
};

// Max of start_{i+1} - end_i over consecutive spans (0 for a single span).
// Throws EmptySpans on empty input.
std::size_t largest_gap(std::vector<EntitySpan> spans);

DetectionResult detect(std::string_view text, const std::vector<EntitySpan>& spans,
                       const DetectionCriterion& criterion = {});

// Left-to-right scan: a repeated non-author type closes the current record.
// A trailing record with fewer than two distinct types folds into the
// previous one. Every input span lands in exactly one record.
std::vector<CitationRecord> segment_citations(const std::vector<EntitySpan>& spans,
                                              std::string_view text);

// The prior-art pattern detector: surname + year + volume + initial page
// number must all co-occur.
bool baseline_detect(std::string_view text);

// BibTeX export. Keys are "<surname><year><first-title-word>", lowercased;
// repeats get numeric suffixes ("-2", "-3", ...).
class BibtexExporter {
public:
    std::string entry(const CitationRecord& record);

private:
    std::unordered_set<std::string> used_keys_;
};

std::string to_bibtex(const CitationRecord& record);

// One detected comment, as written to detections JSONL.
struct DetectedComment {
    Language language = Language::C;
    std::string text;
    std::size_t largest_gap = 0;
    std::vector<CitationRecord> records;
};

// Tags (model + rules unless disabled) and applies the criterion to each
// comment; keeps detections in input order.
std::vector<DetectedComment> run_detection(const std::vector<NormalizedComment>& comments,
                                           const TaggerModel& model,
                                           const DetectionCriterion& criterion,
                                           bool use_rules = true, int jobs = 1);

void write_detections_jsonl(std::ostream& out, const std::vector<DetectedComment>& detections);
std::vector<DetectedComment> read_detections_jsonl(std::istream& in);
std::vector<DetectedComment> load_detections_jsonl(const std::string& path);
void save_detections_jsonl(const std::string& path, const std::vector<DetectedComment>& detections);

}  // namespace citescan
