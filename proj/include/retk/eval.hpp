#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retk/classifier.hpp"
#include "retk/corpus.hpp"
#include "retk/router.hpp"

namespace retk {

// A metric that may be undefined (e.g. strict F1 when every instance was a
// correctly predicted NO_RELATION). Undefined renders "n/a" and must never
// be coerced to 0.
using Metric = std::optional<double>;

struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::uint64_t>> counts;  // counts[gold][pred]
  std::uint64_t total = 0;

  std::uint64_t at(std::size_t gold, std::size_t pred) const {
    return counts[gold][pred];
  }
};

ConfusionMatrix confusion(const std::vector<RelationLabel>& gold,
                          const std::vector<RelationLabel>& pred,
                          const LabelVocabulary& vocabulary);

double accuracy(const ConfusionMatrix& cm);

// TACRED-style micro F1: NO_RELATION is not a positive class. Undefined
// when there are no non-NO gold instances and no non-NO predictions.
Metric micro_f1(const ConfusionMatrix& cm, const RelationLabel& no_relation);

struct ClassScore {
  std::string label;
  double f1 = 0.0;
  std::uint64_t support = 0;  // gold occurrences
  bool zero_support = false;  // label absent from gold and predictions
};

std::vector<ClassScore> per_class_f1(const ConfusionMatrix& cm);

enum class StrictMode {
  kFilteredAccuracy,    // accuracy over the filtered remainder (default)
  kFilteredNoExcluded,  // NO-excluded micro F1 over the filtered remainder
};

// Validation-style strict F1: drop every instance where gold and prediction
// are both NO_RELATION, then score the remainder. Undefined on an empty
// remainder.
Metric strict_f1(const std::vector<RelationLabel>& gold,
                 const std::vector<RelationLabel>& pred,
                 const RelationLabel& no_relation,
                 StrictMode mode = StrictMode::kFilteredAccuracy);

struct EvalReport {
  double accuracy = 0.0;
  Metric micro;
  Metric strict;
  std::vector<ClassScore> per_class;
  std::uint64_t instance_count = 0;
  std::uint64_t filtered_out = 0;  // correct NO_RELATION instances
};

EvalReport evaluate_predictions(const std::vector<RelationLabel>& gold,
                                const std::vector<RelationLabel>& pred,
                                const LabelVocabulary& vocabulary,
                                StrictMode mode = StrictMode::kFilteredAccuracy);

struct ComparisonRow {
  std::string name;  // model name or pair key
  Metric micro;
  Metric accuracy;
  std::optional<double> baseline;
  std::uint64_t support = 0;
  std::vector<ClassScore> per_class;
};

struct ModelComparison {
  std::vector<ComparisonRow> rows;
  std::vector<std::string> class_labels;  // order for per-class grids
};

// Per-pair score report: one row per configured pair key (keyset order)
// plus a RESIDUAL row when the residual bucket is non-empty; baselines are
// joined by pair-key string.
ModelComparison per_pair_report(const Partition& partition,
                                const std::vector<PredictionRecord>& merged,
                                const std::map<std::string, double>& baselines,
                                const RelationLabel& no_relation);

// Side-by-side model report: one row per prediction source, scored against
// the same gold sequence. Every gold id must be covered by every source.
ModelComparison compare_models(
    const std::vector<ExternalScoreFile>& sources,
    const std::vector<std::pair<std::string, RelationLabel>>& gold_by_id,
    const LabelVocabulary& vocabulary);

// Two-column file: pair-key<TAB>baseline-F1.
std::map<std::string, double> load_baseline_file(const std::string& text,
                                                 std::string_view source_name);
std::map<std::string, double> load_baseline_file_path(const std::string& path);

// --- rendering ---

std::string render_metric(const Metric& m, int decimals);
std::string render_comparison_table(const ModelComparison& comp);
std::string render_per_class_grid(const ModelComparison& comp);
std::string render_eval_report(const EvalReport& report);
std::string eval_report_to_json(const EvalReport& report);
std::string comparison_to_json(const ModelComparison& comp);

}  // namespace retk
