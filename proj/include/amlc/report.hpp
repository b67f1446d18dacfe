#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "amlc/harness.hpp"

namespace amlc {

inline constexpr const char* kRunReportSchema = "amlc.run_report/1";
inline constexpr const char* kSummarySchema = "amlc.summary/1";
inline constexpr const char* kModelSchema = "amlc.model/1";
inline constexpr const char* kSweepCsvHeader =
    "learner,budget,seed,accuracy_micro,accuracy_macro,oracle_queries,peer_queries,exhausted";

/// Run report as pretty JSON:
///   schema, rng, dataset,
///   config {learner, b, C, b2, seed, oracle_budget|null, share_against_true_label,
///           normalize_examples, continue_after_budget},
///   metrics {accuracy_micro, accuracy_macro, per_task_accuracy[] (null = no test data), test_examples},
///   training {stream_length, rounds_processed, oracle_queries, peer_queries, mistakes,
///             per_task_mistakes[], shares, budget_exhausted, tau_resets},
///   query_log, warnings[], and wall_clock_seconds only when `include_timing`.
std::string run_report_json(const RunReport& report, bool include_timing = false);

/// Mean and 95% interval of accuracy and queries, one entry per learner.
std::string summary_json(std::span<const RunSummary> summaries, const std::string& dataset);

/// Per-cell sweep rows under kSweepCsvHeader.
std::string sweep_csv(const SweepResult& sweep);

/// {schema, learner, tasks, rows: [[[index, value], ...], ...]}; doubles round-trip exactly.
std::string model_json(const WeightMatrix& model, LearnerKind learner);
/// Throws DataError on a malformed model file.
WeightMatrix load_model(const std::filesystem::path& path);

/// Shortest round-trip text of a double.
std::string format_real(double v);

}  // namespace amlc
