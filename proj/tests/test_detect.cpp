#include "citescan/detect.hpp"

#include <random>
#include <sstream>

#include "doctest.h"

#include "citescan/errors.hpp"

using namespace citescan;

namespace {

EntitySpan span(EntityType type, std::size_t begin, std::size_t end) {
    return EntitySpan{type, begin, end, SpanSource::Model};
}

// Independent oracle: walk every consecutive pair after sorting.
std::size_t gap_oracle(std::vector<EntitySpan> spans) {
    std::sort(spans.begin(), spans.end(),
              [](const EntitySpan& a, const EntitySpan& b) { return a.begin < b.begin; });
    std::size_t best = 0;
    for (std::size_t i = 0; i + 1 < spans.size(); ++i) {
        const std::size_t gap =
            spans[i + 1].begin > spans[i].end ? spans[i + 1].begin - spans[i].end : 0;
        best = std::max(best, gap);
    }
    return best;
}

std::vector<EntitySpan> random_spans(std::mt19937_64& rng, std::size_t count) {
    std::vector<EntitySpan> spans;
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < count; ++i) {
        cursor += rng() % 30;  // gap
        const std::size_t len = 1 + rng() % 12;
        spans.push_back(span(kAllEntityTypes[rng() % kEntityTypeCount], cursor, cursor + len));
        cursor += len;
    }
    // Shuffle so largest_gap has to sort.
    for (std::size_t i = spans.size(); i > 1; --i)
        std::swap(spans[i - 1], spans[rng() % i]);
    return spans;
}

}  // namespace

TEST_CASE("largest_gap basics") {
    CHECK(largest_gap({span(EntityType::Year, 3, 7)}) == 0);
    CHECK(largest_gap({span(EntityType::Year, 0, 5), span(EntityType::Author, 7, 9),
                       span(EntityType::Title, 20, 22)}) == 11);
    CHECK(largest_gap({span(EntityType::Year, 0, 5), span(EntityType::Author, 5, 8)}) == 0);
    CHECK_THROWS_AS(largest_gap({}), EmptySpans);
}

TEST_CASE("largest_gap matches the brute-force oracle on random span sets") {
    std::mt19937_64 rng(2024);
    for (int round = 0; round < 1000; ++round) {
        auto spans = random_spans(rng, 1 + rng() % 10);
        CHECK(largest_gap(spans) == gap_oracle(spans));
    }
}

TEST_CASE("detect applies the four-entity criterion and the gap threshold") {
    const DetectionCriterion criterion;

    SUBCASE("all four types with small gaps is detected") {
        // Mirrors the figure comment: authors, year, title, venue, volume.
        const std::string text =
            "TYPE-I Lorentzian, Becker, P. J. & Coppens, P. (1974). Acta Cryst. A30, 129;";
        const std::vector<EntitySpan> spans = {
            span(EntityType::Author, 19, 32), span(EntityType::Author, 35, 46),
            span(EntityType::Year, 48, 52),   span(EntityType::Title, 55, 65),
            span(EntityType::BooktitleOrJournal, 67, 70),
            span(EntityType::Volume, 72, 75)};
        const auto result = detect(text, spans, criterion);
        CHECK(result.detected);
        CHECK(result.reason == DetectReason::Ok);
        REQUIRE(result.records.size() == 1);
        CHECK(result.records[0].authors ==
              std::vector<std::string>{"Becker, P. J.", "Coppens, P."});
        CHECK(result.records[0].title == "Acta Cryst");
        CHECK(result.records[0].venue == "A30");
        CHECK(result.records[0].year == "1974");
    }

    SUBCASE("missing types rejects") {
        const auto result = detect("x 1999 y", {span(EntityType::Year, 2, 6)}, criterion);
        CHECK_FALSE(result.detected);
        CHECK(result.reason == DetectReason::MissingTypes);
        CHECK(result.records.empty());
    }

    SUBCASE("a 40-character gap rejects") {
        std::vector<EntitySpan> spans = {
            span(EntityType::Author, 0, 8), span(EntityType::Title, 10, 20),
            span(EntityType::Year, 22, 26), span(EntityType::BooktitleOrJournal, 66, 80)};
        CHECK(gap_oracle(spans) == 40);
        const auto result = detect(std::string(90, 'x'), spans, criterion);
        CHECK_FALSE(result.detected);
        CHECK(result.reason == DetectReason::GapExceeded);
        CHECK(result.largest_gap == 40);
    }

    SUBCASE("detected never true with a required type absent (dropout fuzz)") {
        std::mt19937_64 rng(5150);
        for (int round = 0; round < 500; ++round) {
            auto spans = random_spans(rng, 2 + rng() % 8);
            const EntityType dropped = kAllEntityTypes[rng() % 4];
            std::erase_if(spans, [&](const EntitySpan& s) { return s.type == dropped; });
            DetectionCriterion all_gaps;
            all_gaps.max_gap = 1 << 20;
            const auto result = detect(std::string(400, 'x'), spans, all_gaps);
            CHECK_FALSE(result.detected);
        }
    }
}

TEST_CASE("segment_citations splits on repeated non-author types") {
    const std::string text(300, 'x');

    SUBCASE("one of each type stays one record") {
        const std::vector<EntitySpan> spans = {
            span(EntityType::Author, 0, 5), span(EntityType::Title, 6, 12),
            span(EntityType::Year, 13, 17), span(EntityType::BooktitleOrJournal, 18, 30)};
        const auto records = segment_citations(spans, text);
        CHECK(records.size() == 1);
        CHECK(records[0].span_count == 4);
    }

    SUBCASE("repeating the pattern yields two records") {
        std::vector<EntitySpan> spans;
        for (int k = 0; k < 2; ++k) {
            const std::size_t base = k * 60;
            spans.push_back(span(EntityType::Author, base + 0, base + 5));
            spans.push_back(span(EntityType::Title, base + 6, base + 12));
            spans.push_back(span(EntityType::Year, base + 13, base + 17));
            spans.push_back(span(EntityType::BooktitleOrJournal, base + 18, base + 30));
        }
        CHECK(segment_citations(spans, text).size() == 2);
    }

    SUBCASE("six repetitions yield six records") {
        std::vector<EntitySpan> spans;
        for (int k = 0; k < 6; ++k) {
            const std::size_t base = k * 40;
            spans.push_back(span(EntityType::Title, base + 0, base + 8));
            spans.push_back(span(EntityType::Year, base + 9, base + 13));
            spans.push_back(span(EntityType::BooktitleOrJournal, base + 14, base + 24));
        }
        CHECK(segment_citations(spans, text).size() == 6);
    }

    SUBCASE("author repetition never splits a record") {
        const std::vector<EntitySpan> spans = {
            span(EntityType::Author, 0, 5), span(EntityType::Author, 6, 11),
            span(EntityType::Author, 12, 17), span(EntityType::Title, 18, 30),
            span(EntityType::Year, 31, 35)};
        const auto records = segment_citations(spans, text);
        REQUIRE(records.size() == 1);
        CHECK(records[0].authors.size() == 3);
    }

    SUBCASE("a trailing fragment folds into the previous record") {
        const std::vector<EntitySpan> spans = {
            span(EntityType::Author, 0, 5), span(EntityType::Title, 6, 12),
            span(EntityType::Year, 13, 17), span(EntityType::BooktitleOrJournal, 18, 30),
            span(EntityType::Year, 31, 35)};  // repeated year, then nothing else
        const auto records = segment_citations(spans, text);
        REQUIRE(records.size() == 1);
        CHECK(records[0].span_count == 5);
    }

    SUBCASE("segmentation conserves spans") {
        std::mt19937_64 rng(77);
        for (int round = 0; round < 400; ++round) {
            std::vector<EntitySpan> spans;
            std::size_t cursor = 0;
            const std::size_t n = 1 + rng() % 14;
            for (std::size_t i = 0; i < n; ++i) {
                cursor += 1 + rng() % 5;
                spans.push_back(span(kAllEntityTypes[rng() % kEntityTypeCount],
                                     cursor, cursor + 3));
                cursor += 3;
            }
            const auto records = segment_citations(spans, std::string(cursor + 4, 'x'));
            std::size_t total = 0;
            for (const auto& record : records) total += record.span_count;
            CHECK(total == spans.size());
        }
    }
}

TEST_CASE("detection-set monotonicity in the gap threshold") {
    std::mt19937_64 rng(31);
    for (int round = 0; round < 200; ++round) {
        const auto spans = random_spans(rng, 4 + rng() % 6);
        const std::string text(600, 'x');
        bool previous = false;
        for (int gap = 0; gap <= 64; gap += 8) {
            DetectionCriterion criterion;
            criterion.max_gap = gap;
            const bool detected = detect(text, spans, criterion).detected;
            if (previous) CHECK(detected);  // once detected, stays detected
            previous = detected;
        }
    }
}

TEST_CASE("baseline_detect needs all four patterns") {
    CHECK(baseline_detect("Smith, J. (1999). J. Foo, vol. 12, pp. 34-56"));
    // The figure text has no page anchor and no range, so it is missed.
    CHECK_FALSE(baseline_detect(
        "TYPE-I Lorentzian, Becker, P. J. & Coppens, P. (1974). Acta Cryst. A30, 129;"));
    CHECK_FALSE(baseline_detect(""));
    CHECK_FALSE(baseline_detect("Smith wrote this in 1999"));
    CHECK(baseline_detect("Doe 1999 Journal vol. 3 pages 10"));
    CHECK(baseline_detect("Doe (12) 1999 pp. 7"));
}

TEST_CASE("to_bibtex formatting and key allocation") {
    CitationRecord knuth;
    knuth.authors = {"Knuth, D."};
    knuth.title = "Literate Programming";
    knuth.year = "1984";

    SUBCASE("key is surname + year + first title word") {
        const std::string entry = to_bibtex(knuth);
        CHECK(entry.rfind("@misc{knuth1984literate,", 0) == 0);
        CHECK(entry.find("  author = {Knuth, D.},") != std::string::npos);
        CHECK(entry.find("  title = {Literate Programming},") != std::string::npos);
        CHECK(entry.find("  year = {1984}") != std::string::npos);
    }

    SUBCASE("venue+year only omits author/title fields") {
        CitationRecord record;
        record.venue = "CACM";
        record.year = "1989";
        const std::string entry = to_bibtex(record);
        CHECK(entry.find("author") == std::string::npos);
        CHECK(entry.find("title") == std::string::npos);
        CHECK(entry.find("  journal = {CACM},") != std::string::npos);
        CHECK(entry.rfind("@misc{1989,", 0) == 0);
    }

    SUBCASE("duplicate keys get numeric suffixes") {
        BibtexExporter exporter;
        const std::string first = exporter.entry(knuth);
        const std::string second = exporter.entry(knuth);
        const std::string third = exporter.entry(knuth);
        CHECK(first.rfind("@misc{knuth1984literate,", 0) == 0);
        CHECK(second.rfind("@misc{knuth1984literate-2,", 0) == 0);
        CHECK(third.rfind("@misc{knuth1984literate-3,", 0) == 0);
    }

    SUBCASE("field order is fixed") {
        CitationRecord record;
        record.authors = {"A. One", "B. Two"};
        record.title = "T";
        record.venue = "V";
        record.year = "2000";
        record.volume = "1";
        record.number = "2";
        record.pages = "3-4";
        record.month = "May";
        record.publisher = "P";
        record.address = "Addr";
        record.doi = "10.1 x";
        record.isbn = "ISBN 1";
        record.issn = "ISSN 2";
        record.url = "http";
        const std::string entry = to_bibtex(record);
        std::size_t last = 0;
        for (const char* field : {"author", "title", "journal", "year", "volume",
                                  "number", "pages", "month", "publisher", "address",
                                  "doi", "isbn", "issn", "url"}) {
            const std::size_t pos = entry.find(std::string("  ") + field + " = {");
            REQUIRE(pos != std::string::npos);
            CHECK(pos > last);
            last = pos;
        }
        CHECK(entry.find("A. One and B. Two") != std::string::npos);
    }
}

TEST_CASE("detections JSONL round-trips") {
    DetectedComment detection;
    detection.language = Language::Cpp;
    detection.text = "Doe, J. Title. CACM (1999)";
    detection.largest_gap = 2;
    CitationRecord record;
    record.authors = {"Doe, J."};
    record.title = "Title";
    record.venue = "CACM";
    record.year = "1999";
    record.begin = 0;
    record.end = 26;
    record.span_count = 4;
    detection.records.push_back(record);

    std::ostringstream out;
    write_detections_jsonl(out, {detection});
    std::istringstream in(out.str());
    const auto loaded = read_detections_jsonl(in);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].language == Language::Cpp);
    CHECK(loaded[0].largest_gap == 2);
    REQUIRE(loaded[0].records.size() == 1);
    CHECK(loaded[0].records[0].title == "Title");
    CHECK(loaded[0].records[0].authors == std::vector<std::string>{"Doe, J."});
}
