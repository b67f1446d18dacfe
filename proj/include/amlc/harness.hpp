#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amlc/data.hpp"
#include "amlc/learners.hpp"
#include "amlc/model.hpp"

namespace amlc {

struct RunConfig {
  LearnerKind learner = LearnerKind::amlc;
  HyperParams hyper;
  std::uint64_t seed = 0;
  /// Total oracle labels allowed; unlimited when empty.
  std::optional<std::size_t> oracle_budget;
  LearnerOptions learner_options;
  bool normalize_examples = false;
  /// Keep streaming after the budget is spent instead of ending the run.
  bool continue_after_budget = false;
  /// Keep every StepOutcome in TrainingResult::trace.
  bool record_trace = false;

  void validate() const { hyper.validate(); }
};

/// Test-set accuracy. Tasks without test examples are nullopt and left out
/// of the macro average.
struct Accuracy {
  std::vector<std::optional<double>> per_task;
  double micro = 0.0;
  double macro = 0.0;
  std::size_t test_examples = 0;
  std::vector<std::string> warnings;

  friend bool operator==(const Accuracy&, const Accuracy&) = default;
};

struct RunReport {
  RunConfig config;
  std::string dataset;
  std::string rng_algorithm;
  Accuracy accuracy;
  std::size_t stream_length = 0;
  std::size_t rounds_processed = 0;
  std::size_t oracle_queries = 0;
  std::size_t peer_queries = 0;
  std::size_t mistakes = 0;
  std::vector<std::size_t> per_task_mistakes;
  std::size_t shares = 0;
  /// A query was demanded after the budget ran out.
  bool budget_exhausted = false;
  std::size_t tau_resets = 0;
  /// One character per processed round: 'o' oracle query, 'p' peer query,
  /// 'x' refused for lack of budget, '.' no query.
  std::string query_log;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> warnings;
};

struct TrainingResult {
  WeightMatrix model;       ///< finalize()d, used for evaluation
  WeightMatrix weights;     ///< raw per-task weights at the end of the stream
  RelationshipMatrix tau;   ///< empty for learners without one
  RunReport report;
  std::vector<StepOutcome> trace;
};

/// One pass over shuffle_stream(dataset, config.seed). The shuffle consumes
/// the run generator first and the learner continues from it. The model is
/// evaluated on the dataset's test splits.
TrainingResult run_training(const RunConfig& config, const MultitaskDataset& dataset);

/// sign(<x, model_k>) == y rates over every task's test split.
Accuracy evaluate(const WeightMatrix& model, const MultitaskDataset& dataset);

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  ///< 1.96 * s / sqrt(n), s the sample std deviation
};

/// Normal-approximation 95% interval. A single value has half-width 0.
/// Throws std::invalid_argument on an empty input.
MeanCi mean_ci95(std::span<const double> values);

struct RunSummary {
  LearnerKind learner = LearnerKind::amlc;
  std::size_t runs = 0;
  MeanCi accuracy_micro;
  MeanCi accuracy_macro;
  MeanCi oracle_queries;
  MeanCi peer_queries;
};

/// Throws std::invalid_argument when reports is empty or mixes learners.
RunSummary aggregate_runs(std::span<const RunReport> reports);

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Cells must write
/// to disjoint outputs; exceptions are rethrown in index order.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

struct SweepRow {
  LearnerKind learner = LearnerKind::amlc;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  double accuracy_micro = 0.0;
  double accuracy_macro = 0.0;
  std::size_t oracle_queries = 0;
  std::size_t peer_queries = 0;
  bool exhausted = false;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepSummaryRow {
  LearnerKind learner = LearnerKind::amlc;
  std::size_t budget = 0;
  std::size_t runs = 0;
  MeanCi accuracy_micro;
  MeanCi oracle_queries;
  std::size_t exhausted_runs = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  ///< sorted by (learner order given, budget, seed)
  std::vector<SweepSummaryRow> summary;
};

/// Runs every (template, budget, seed) cell. Each template fixes a learner and
/// its hyperparameters; its budget and seed fields are overwritten per cell.
/// Budgets must be ascending.
SweepResult budget_sweep(const MultitaskDataset& dataset, std::span<const RunConfig> templates,
                         std::span<const std::size_t> budgets, std::span<const std::uint64_t> seeds,
                         std::size_t workers = 1);

/// floor(pct / 100 * total) for each percentage.
std::vector<std::size_t> budgets_from_percentages(std::span<const double> percentages, std::size_t total);

/// 20 values log-spaced over [1e-4, 1e2].
std::vector<double> default_C_grid();

struct CvResult {
  double best_C = 0.0;
  std::vector<double> grid;
  std::vector<double> mean_accuracy;  ///< parallel to grid
};

/// Per-task stratified k-fold selection of C. Each task's training examples
/// are permuted with `seed` and dealt round-robin into folds; fold f trains on
/// the other folds (stream seed seed + f, shared by every C) and scores micro
/// accuracy on fold f. Highest mean wins, ties go to the smaller C.
CvResult cross_validate_C(const MultitaskDataset& dataset, const RunConfig& base, std::span<const double> grid,
                          std::size_t folds, std::uint64_t seed, std::size_t workers = 1);

}  // namespace amlc
