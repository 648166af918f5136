#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "citescan/detect.hpp"
#include "citescan/ner.hpp"
#include "citescan/types.hpp"

namespace citescan {

struct Metrics {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// precision = tp/(tp+fp), recall = tp/(tp+fn), f1 = harmonic mean;
// all 0 when the respective denominator is 0.
Metrics prf(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

struct FoldAssignment {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<int> assignment;  // item index -> fold index
};

// Seeded shuffle then round-robin; fold sizes differ by at most one.
FoldAssignment kfold(std::size_t n_items, int k, std::uint64_t seed);

// A comment counts as a gold citation iff it carries at least one gold span.
bool is_gold_citation(const AnnotatedComment& comment);

struct CrossValidateOptions {
    int k = 10;
    std::uint64_t seed = 42;
    int epochs = 10;
    int max_gap = 10;
    bool use_rules = true;
    int jobs = 1;
};

struct ComboMetrics {
    EntityTypeSet combo;
    Metrics metrics;
};

struct CrossValidationResult {
    std::vector<ComboMetrics> per_combo;              // same order as input combos
    std::vector<std::vector<EntitySpan>> predictions; // held-out spans per comment
    FoldAssignment folds;
};

// For each fold: train on the other k-1 folds, tag the held-out fold, apply
// the detection criterion per combo; TP/FP/FN micro-averaged over folds at
// comment level. Throws TooFewItems / DegenerateCorpus.
CrossValidationResult cross_validate(const std::vector<AnnotatedComment>& gold,
                                     const std::vector<EntityTypeSet>& combos,
                                     const LexiconSet& lexicons,
                                     const CrossValidateOptions& options = {});

// The five entity-set combinations swept by the evaluation harness.
std::vector<EntityTypeSet> default_combos();

struct SweepPoint {
    int max_gap = 0;
    Metrics metrics;
    std::vector<bool> detected;  // per gold comment
};

// Evaluates detection with a fixed tagger at each threshold. Thresholds must
// be ascending; the detected sets are checked to grow monotonically.
std::vector<SweepPoint> sensitivity_sweep(const std::vector<AnnotatedComment>& gold,
                                          const TaggerModel& model,
                                          EntityTypeSet combo,
                                          const std::vector<int>& max_gaps,
                                          bool use_rules = true);

struct EntityAccuracyCounts {
    std::uint64_t correct = 0;
    std::uint64_t partially_correct = 0;
    std::uint64_t incorrect = 0;
};

using EntityAccuracy = std::map<EntityType, EntityAccuracyCounts>;

// Per comment and type: correct when every predicted span of the type matches
// a gold span (same type, overlap >= min_overlap of the shorter span),
// incorrect when none do, partially correct otherwise. A type missed entirely
// against gold counts as incorrect.
EntityAccuracy entity_accuracy(const std::vector<AnnotatedComment>& gold,
                               const std::vector<std::vector<EntitySpan>>& predicted,
                               double min_overlap = 0.5);

// Chance-corrected agreement; 1.0 when both annotators agree everywhere.
// Throws LengthMismatch.
double cohen_kappa(const std::vector<std::string>& labels_a,
                   const std::vector<std::string>& labels_b);

// Fraction of pipeline detections the pattern baseline also finds.
struct BaselineComparison {
    std::uint64_t ner_detections = 0;
    std::uint64_t baseline_detections = 0;
    std::uint64_t both = 0;
    double overlap_fraction = 0.0;  // both / ner_detections
};

BaselineComparison compare_with_baseline(const std::vector<AnnotatedComment>& gold,
                                         const std::vector<std::vector<EntitySpan>>& predicted,
                                         const DetectionCriterion& criterion);

// CSV writers used by the evaluate/sweep subcommands.
void write_combo_metrics_csv(std::ostream& out, const std::vector<ComboMetrics>& rows, int max_gap);
void write_sweep_csv(std::ostream& out, EntityTypeSet combo, const std::vector<SweepPoint>& points);
void write_entity_accuracy_csv(std::ostream& out, const EntityAccuracy& accuracy);

}  // namespace citescan
