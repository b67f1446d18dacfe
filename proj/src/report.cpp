#include "amlc/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "amlc/errors.hpp"
#include "json.hpp"

namespace amlc {

using nlohmann::json;

std::string format_real(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string run_report_json(const RunReport& r, bool include_timing) {
  const auto& c = r.config;
  json j;
  j["schema"] = kRunReportSchema;
  j["rng"] = r.rng_algorithm;
  j["dataset"] = r.dataset;
  j["config"] = {
      {"learner", std::string(to_string(c.learner))},
      {"b", c.hyper.b},
      {"C", c.hyper.C},
      {"b2", c.hyper.b2},
      {"seed", c.seed},
      {"oracle_budget", c.oracle_budget ? json(*c.oracle_budget) : json(nullptr)},
      {"share_against_true_label", c.learner_options.share_against_true_label},
      {"normalize_examples", c.normalize_examples},
      {"continue_after_budget", c.continue_after_budget},
  };
  json per_task = json::array();
  for (const auto& a : r.accuracy.per_task) per_task.push_back(a ? json(*a) : json(nullptr));
  j["metrics"] = {
      {"accuracy_micro", r.accuracy.micro},
      {"accuracy_macro", r.accuracy.macro},
      {"per_task_accuracy", per_task},
      {"test_examples", r.accuracy.test_examples},
  };
  j["training"] = {
      {"stream_length", r.stream_length},
      {"rounds_processed", r.rounds_processed},
      {"oracle_queries", r.oracle_queries},
      {"peer_queries", r.peer_queries},
      {"mistakes", r.mistakes},
      {"per_task_mistakes", r.per_task_mistakes},
      {"shares", r.shares},
      {"budget_exhausted", r.budget_exhausted},
      {"tau_resets", r.tau_resets},
  };
  j["query_log"] = r.query_log;
  j["warnings"] = r.warnings;
  if (include_timing) j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j.dump(2) + "\n";
}

std::string summary_json(std::span<const RunSummary> summaries, const std::string& dataset) {
  auto ci = [](const MeanCi& m) { return json{{"mean", m.mean}, {"ci95", m.half_width}}; };
  json rows = json::array();
  for (const auto& s : summaries) {
    rows.push_back({
        {"learner", std::string(to_string(s.learner))},
        {"runs", s.runs},
        {"accuracy_micro", ci(s.accuracy_micro)},
        {"accuracy_macro", ci(s.accuracy_macro)},
        {"oracle_queries", ci(s.oracle_queries)},
        {"peer_queries", ci(s.peer_queries)},
    });
  }
  json j{{"schema", kSummarySchema}, {"dataset", dataset}, {"learners", rows}};
  return j.dump(2) + "\n";
}

std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << kSweepCsvHeader << '\n';
  for (const auto& r : sweep.rows) {
    out << to_string(r.learner) << ',' << r.budget << ',' << r.seed << ',' << format_real(r.accuracy_micro) << ','
        << format_real(r.accuracy_macro) << ',' << r.oracle_queries << ',' << r.peer_queries << ','
        << (r.exhausted ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string model_json(const WeightMatrix& model, LearnerKind learner) {
  json rows = json::array();
  for (const auto& row : model.rows()) {
    json entries = json::array();
    for (const auto& e : row.entries()) entries.push_back({e.index, e.value});
    rows.push_back(std::move(entries));
  }
  json j{{"schema", kModelSchema},
         {"learner", std::string(to_string(learner))},
         {"tasks", model.tasks()},
         {"rows", rows}};
  return j.dump() + "\n";
}

WeightMatrix load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path.string());
  try {
    const json j = json::parse(in);
    if (j.at("schema") != kModelSchema) throw DataError("unexpected schema");
    const auto& rows = j.at("rows");
    if (rows.size() != j.at("tasks").get<std::size_t>()) throw DataError("row count does not match tasks");
    std::vector<SparseVector> out;
    for (const auto& row : rows) {
      std::vector<SparseEntry> entries;
      for (const auto& e : row) entries.push_back({e.at(0).get<FeatureIndex>(), e.at(1).get<double>()});
      out.push_back(SparseVector::from_sorted(std::move(entries)));
    }
    return WeightMatrix(std::move(out));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const std::exception& e) {
    throw DataError(path.string() + ": malformed model file: " + e.what());
  }
}

}  // namespace amlc
