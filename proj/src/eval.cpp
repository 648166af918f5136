#include "citescan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "citescan/errors.hpp"
#include "citescan/rng.hpp"

namespace citescan {

Metrics prf(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
    Metrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    if (tp + fp > 0) m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

FoldAssignment kfold(std::size_t n_items, int k, std::uint64_t seed) {
    if (k < 2) throw TooFewItems("kfold: k must be >= 2");
    if (n_items < static_cast<std::size_t>(k))
        throw TooFewItems("kfold: " + std::to_string(n_items) + " items into " +
                          std::to_string(k) + " folds");
    std::vector<std::size_t> order(n_items);
    for (std::size_t i = 0; i < n_items; ++i) order[i] = i;
    deterministic_shuffle(order, seed);

    FoldAssignment folds;
    folds.k = k;
    folds.seed = seed;
    folds.assignment.resize(n_items);
    for (std::size_t pos = 0; pos < n_items; ++pos)
        folds.assignment[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    return folds;
}

bool is_gold_citation(const AnnotatedComment& comment) { return !comment.gold.empty(); }

std::vector<EntityTypeSet> default_combos() {
    using T = EntityType;
    return {
        EntityTypeSet{T::Author, T::Title, T::Year, T::BooktitleOrJournal},
        EntityTypeSet{T::Title, T::Year, T::BooktitleOrJournal},
        EntityTypeSet{T::Author, T::Year, T::BooktitleOrJournal},
        EntityTypeSet{T::Author, T::Title, T::BooktitleOrJournal},
        EntityTypeSet{T::Year, T::BooktitleOrJournal},
    };
}

CrossValidationResult cross_validate(const std::vector<AnnotatedComment>& gold,
                                     const std::vector<EntityTypeSet>& combos,
                                     const LexiconSet& lexicons,
                                     const CrossValidateOptions& options) {
    CrossValidationResult result;
    result.folds = kfold(gold.size(), options.k, options.seed);
    result.predictions.resize(gold.size());

    auto run_fold = [&](int fold) {
        std::vector<AnnotatedComment> training;
        training.reserve(gold.size());
        for (std::size_t i = 0; i < gold.size(); ++i)
            if (result.folds.assignment[i] != fold) training.push_back(gold[i]);
        const TaggerModel model =
            train(training, options.epochs, options.seed, lexicons);
        for (std::size_t i = 0; i < gold.size(); ++i) {
            if (result.folds.assignment[i] != fold) continue;
            result.predictions[i] = options.use_rules
                                        ? tag_with_rules(model, gold[i].text)
                                        : tag(model, gold[i].text);
        }
    };

    if (options.jobs <= 1) {
        for (int fold = 0; fold < options.k; ++fold) run_fold(fold);
    } else {
        std::vector<std::thread> pool;
        const int workers = std::min(options.jobs, options.k);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int fold = w; fold < options.k; fold += workers) run_fold(fold);
            });
        for (auto& t : pool) t.join();
    }

    for (const EntityTypeSet& combo : combos) {
        const DetectionCriterion criterion{combo, options.max_gap};
        std::uint64_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            const bool truth = is_gold_citation(gold[i]);
            const bool found =
                detect(gold[i].text, result.predictions[i], criterion).detected;
            if (truth && found) ++tp;
            else if (!truth && found) ++fp;
            else if (truth && !found) ++fn;
        }
        result.per_combo.push_back(ComboMetrics{combo, prf(tp, fp, fn)});
    }
    return result;
}

std::vector<SweepPoint> sensitivity_sweep(const std::vector<AnnotatedComment>& gold,
                                          const TaggerModel& model,
                                          EntityTypeSet combo,
                                          const std::vector<int>& max_gaps,
                                          bool use_rules) {
    if (!std::is_sorted(max_gaps.begin(), max_gaps.end()))
        throw DataError("sensitivity_sweep: thresholds must be ascending");

    struct Tagged {
        bool types_ok = false;
        std::size_t gap = 0;
    };
    std::vector<Tagged> tagged(gold.size());
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const auto spans = use_rules ? tag_with_rules(model, gold[i].text)
                                     : tag(model, gold[i].text);
        EntityTypeSet present;
        for (const auto& span : spans) present.insert(span.type);
        tagged[i].types_ok = present.contains_all(combo);
        tagged[i].gap = spans.empty() ? 0 : largest_gap(spans);
    }

    std::vector<SweepPoint> points;
    points.reserve(max_gaps.size());
    for (int max_gap : max_gaps) {
        SweepPoint point;
        point.max_gap = max_gap;
        point.detected.resize(gold.size());
        std::uint64_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            const bool found = tagged[i].types_ok &&
                               tagged[i].gap <= static_cast<std::size_t>(max_gap);
            point.detected[i] = found;
            const bool truth = is_gold_citation(gold[i]);
            if (truth && found) ++tp;
            else if (!truth && found) ++fp;
            else if (truth && !found) ++fn;
        }
        point.metrics = prf(tp, fp, fn);
        if (!points.empty()) {
            for (std::size_t i = 0; i < gold.size(); ++i)
                if (points.back().detected[i] && !point.detected[i])
                    throw std::logic_error("sweep lost a detection at a larger threshold");
        }
        points.push_back(std::move(point));
    }
    return points;
}

namespace {

bool spans_match(const EntitySpan& predicted, const EntitySpan& gold, double min_overlap) {
    if (predicted.type != gold.type) return false;
    const std::size_t begin = std::max(predicted.begin, gold.begin);
    const std::size_t end = std::min(predicted.end, gold.end);
    if (end <= begin) return false;
    const std::size_t overlap = end - begin;
    const std::size_t shorter =
        std::min(predicted.end - predicted.begin, gold.end - gold.begin);
    return static_cast<double>(overlap) >= min_overlap * static_cast<double>(shorter);
}

}  // namespace

EntityAccuracy entity_accuracy(const std::vector<AnnotatedComment>& gold,
                               const std::vector<std::vector<EntitySpan>>& predicted,
                               double min_overlap) {
    if (gold.size() != predicted.size())
        throw LengthMismatch("entity_accuracy: gold and predictions differ in size");

    EntityAccuracy accuracy;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        for (EntityType type : kAllEntityTypes) {
            std::vector<EntitySpan> gold_spans, predicted_spans;
            for (const auto& span : gold[i].gold)
                if (span.type == type) gold_spans.push_back(span);
            for (const auto& span : predicted[i])
                if (span.type == type) predicted_spans.push_back(span);
            if (gold_spans.empty() && predicted_spans.empty()) continue;

            auto& counts = accuracy[type];
            if (predicted_spans.empty()) {
                ++counts.incorrect;  // the type was missed entirely
                continue;
            }
            std::size_t matched = 0;
            for (const auto& span : predicted_spans)
                for (const auto& ref : gold_spans)
                    if (spans_match(span, ref, min_overlap)) {
                        ++matched;
                        break;
                    }
            if (matched == predicted_spans.size()) ++counts.correct;
            else if (matched == 0) ++counts.incorrect;
            else ++counts.partially_correct;
        }
    }
    return accuracy;
}

double cohen_kappa(const std::vector<std::string>& labels_a,
                   const std::vector<std::string>& labels_b) {
    if (labels_a.size() != labels_b.size())
        throw LengthMismatch("cohen_kappa: " + std::to_string(labels_a.size()) +
                             " vs " + std::to_string(labels_b.size()) + " labels");
    if (labels_a.empty()) throw LengthMismatch("cohen_kappa: no labels");

    const double n = static_cast<double>(labels_a.size());
    std::map<std::string, std::uint64_t> count_a, count_b;
    std::uint64_t agree = 0;
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        ++count_a[labels_a[i]];
        ++count_b[labels_b[i]];
        if (labels_a[i] == labels_b[i]) ++agree;
    }
    const double p_o = static_cast<double>(agree) / n;
    double p_e = 0.0;
    for (const auto& [label, ca] : count_a) {
        const auto it = count_b.find(label);
        if (it == count_b.end()) continue;
        p_e += (static_cast<double>(ca) / n) * (static_cast<double>(it->second) / n);
    }
    if (std::abs(1.0 - p_e) < 1e-12) return p_o == 1.0 ? 1.0 : 0.0;
    return (p_o - p_e) / (1.0 - p_e);
}

BaselineComparison compare_with_baseline(const std::vector<AnnotatedComment>& gold,
                                         const std::vector<std::vector<EntitySpan>>& predicted,
                                         const DetectionCriterion& criterion) {
    if (gold.size() != predicted.size())
        throw LengthMismatch("compare_with_baseline: gold and predictions differ in size");
    BaselineComparison cmp;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const bool ner = detect(gold[i].text, predicted[i], criterion).detected;
        const bool base = baseline_detect(gold[i].text);
        if (ner) ++cmp.ner_detections;
        if (base) ++cmp.baseline_detections;
        if (ner && base) ++cmp.both;
    }
    if (cmp.ner_detections > 0)
        cmp.overlap_fraction =
            static_cast<double>(cmp.both) / static_cast<double>(cmp.ner_detections);
    return cmp;
}

// ---------------------------------------------------------------------------
// CSV output

void write_combo_metrics_csv(std::ostream& out, const std::vector<ComboMetrics>& rows,
                             int max_gap) {
    out << "combo,max_gap,tp,fp,fn,precision,recall,f1\n";
    for (const auto& row : rows) {
        out << '"' << row.combo.to_string() << '"' << ',' << max_gap << ','
            << row.metrics.tp << ',' << row.metrics.fp << ',' << row.metrics.fn << ','
            << row.metrics.precision << ',' << row.metrics.recall << ','
            << row.metrics.f1 << '\n';
    }
}

void write_sweep_csv(std::ostream& out, EntityTypeSet combo,
                     const std::vector<SweepPoint>& points) {
    out << "combo,max_gap,tp,fp,fn,precision,recall,f1\n";
    for (const auto& point : points) {
        out << '"' << combo.to_string() << '"' << ',' << point.max_gap << ','
            << point.metrics.tp << ',' << point.metrics.fp << ',' << point.metrics.fn
            << ',' << point.metrics.precision << ',' << point.metrics.recall << ','
            << point.metrics.f1 << '\n';
    }
}

void write_entity_accuracy_csv(std::ostream& out, const EntityAccuracy& accuracy) {
    out << "entity,correct,partially_correct,incorrect\n";
    for (const auto& [type, counts] : accuracy) {
        out << to_string(type) << ',' << counts.correct << ','
            << counts.partially_correct << ',' << counts.incorrect << '\n';
    }
}

}  // namespace citescan
