#include "amlc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "amlc/errors.hpp"

namespace amlc {

TrainingResult run_training(const RunConfig& config, const MultitaskDataset& input) {
  config.validate();
  if (input.task_count() == 0 || input.train_size() == 0) {
    throw ConfigError("dataset '" + input.name + "' has no training examples");
  }

  std::optional<MultitaskDataset> normalized;
  if (config.normalize_examples) {
    normalized = input;
    normalize_examples(*normalized);
  }
  const MultitaskDataset& ds = normalized ? *normalized : input;
  const auto started = std::chrono::steady_clock::now();

  Rng rng(config.seed);
  const StreamOrder order = shuffle_stream(ds, rng);
  LearnerState state(config.learner, ds.task_count(), config.hyper, rng, config.learner_options);
  BudgetedOracle oracle(config.oracle_budget);

  TrainingResult result;
  RunReport& report = result.report;
  report.config = config;
  report.dataset = ds.name;
  report.rng_algorithm = std::string(Rng::algorithm);
  report.stream_length = order.items.size();
  report.query_log.reserve(order.items.size());
  if (config.record_trace) result.trace.reserve(order.items.size());

  for (const StreamItem& item : order.items) {
    const Example& ex = ds.tasks[item.task].train[item.index];
    oracle.present(ex.y);
    StepOutcome out = step(state, ex.x, item.task, oracle);
    ++report.rounds_processed;
    report.query_log += out.queried_oracle ? 'o' : out.queried_peer ? 'p' : out.oracle_refused ? 'x' : '.';
    const bool refused = out.oracle_refused;
    if (config.record_trace) result.trace.push_back(std::move(out));
    if (refused) {
      report.budget_exhausted = true;
      if (!config.continue_after_budget) break;
    }
  }

  report.oracle_queries = state.counters.oracle_queries;
  report.peer_queries = state.counters.peer_queries;
  report.per_task_mistakes = state.counters.mistakes;
  for (auto m : state.counters.mistakes) report.mistakes += m;
  report.shares = state.counters.shares;
  report.tau_resets = state.counters.tau_resets;
  if (report.tau_resets > 0) {
    report.warnings.push_back("committee row underflowed and was reset to uniform " +
                              std::to_string(report.tau_resets) + " time(s)");
  }

  result.model = finalize(state);
  result.weights = std::move(state.w);
  result.tau = std::move(state.tau);
  report.accuracy = evaluate(result.model, ds);
  for (const auto& w : report.accuracy.warnings) report.warnings.push_back(w);
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

Accuracy evaluate(const WeightMatrix& model, const MultitaskDataset& dataset) {
  if (model.tasks() != dataset.task_count()) {
    throw std::invalid_argument("model has " + std::to_string(model.tasks()) + " rows but dataset has " +
                                std::to_string(dataset.task_count()) + " tasks");
  }
  Accuracy acc;
  acc.per_task.resize(dataset.task_count());
  std::size_t correct_total = 0;
  double macro_sum = 0.0;
  std::size_t macro_tasks = 0;
  for (TaskId k = 0; k < dataset.task_count(); ++k) {
    const auto& test = dataset.tasks[k].test;
    if (test.empty()) {
      acc.warnings.push_back("task " + std::to_string(k + 1) + " has no test examples");
      continue;
    }
    std::size_t correct = 0;
    for (const auto& ex : test) {
      if (predict_sign(dot(ex.x, model.row(k))) == ex.y) ++correct;
    }
    const double a = static_cast<double>(correct) / static_cast<double>(test.size());
    acc.per_task[k] = a;
    correct_total += correct;
    acc.test_examples += test.size();
    macro_sum += a;
    ++macro_tasks;
  }
  if (acc.test_examples > 0) {
    acc.micro = static_cast<double>(correct_total) / static_cast<double>(acc.test_examples);
    acc.macro = macro_sum / static_cast<double>(macro_tasks);
  }
  return acc;
}

MeanCi mean_ci95(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_ci95 of an empty sample");
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  // A constant sample has zero spread even when sum / n rounds away from it.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    return {values.front(), 0.0};
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, 1.96 * sd / std::sqrt(n)};
}

RunSummary aggregate_runs(std::span<const RunReport> reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate_runs needs at least one report");
  RunSummary s;
  s.learner = reports.front().config.learner;
  s.runs = reports.size();
  std::vector<double> micro, macro, oracle, peer;
  for (const auto& r : reports) {
    if (r.config.learner != s.learner) throw std::invalid_argument("aggregate_runs mixes learners");
    micro.push_back(r.accuracy.micro);
    macro.push_back(r.accuracy.macro);
    oracle.push_back(static_cast<double>(r.oracle_queries));
    peer.push_back(static_cast<double>(r.peer_queries));
  }
  s.accuracy_micro = mean_ci95(micro);
  s.accuracy_macro = mean_ci95(macro);
  s.oracle_queries = mean_ci95(oracle);
  s.peer_queries = mean_ci95(peer);
  return s;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  workers = std::clamp<std::size_t>(workers, 1, n);
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

SweepResult budget_sweep(const MultitaskDataset& dataset, std::span<const RunConfig> templates,
                         std::span<const std::size_t> budgets, std::span<const std::uint64_t> seeds,
                         std::size_t workers) {
  if (budgets.empty()) throw ConfigError("budget sweep needs at least one budget");
  if (seeds.empty()) throw ConfigError("budget sweep needs at least one seed");
  if (!std::is_sorted(budgets.begin(), budgets.end())) throw ConfigError("budgets must be ascending");

  const std::size_t nb = budgets.size(), ns = seeds.size();
  SweepResult result;
  result.rows.resize(templates.size() * nb * ns);
  parallel_for(result.rows.size(), workers, [&](std::size_t cell) {
    const std::size_t t = cell / (nb * ns), b = (cell / ns) % nb, s = cell % ns;
    RunConfig cfg = templates[t];
    cfg.oracle_budget = budgets[b];
    cfg.seed = seeds[s];
    cfg.record_trace = false;
    const auto run = run_training(cfg, dataset);
    const auto& r = run.report;
    result.rows[cell] = SweepRow{cfg.learner,           budgets[b],     seeds[s],           r.accuracy.micro,
                                 r.accuracy.macro,      r.oracle_queries, r.peer_queries, r.budget_exhausted};
  });

  for (std::size_t t = 0; t < templates.size(); ++t) {
    for (std::size_t b = 0; b < nb; ++b) {
      std::vector<double> acc, queries;
      SweepSummaryRow row;
      row.learner = templates[t].learner;
      row.budget = budgets[b];
      row.runs = ns;
      for (std::size_t s = 0; s < ns; ++s) {
        const auto& r = result.rows[(t * nb + b) * ns + s];
        acc.push_back(r.accuracy_micro);
        queries.push_back(static_cast<double>(r.oracle_queries));
        if (r.exhausted) ++row.exhausted_runs;
      }
      row.accuracy_micro = mean_ci95(acc);
      row.oracle_queries = mean_ci95(queries);
      result.summary.push_back(row);
    }
  }
  return result;
}

std::vector<std::size_t> budgets_from_percentages(std::span<const double> percentages, std::size_t total) {
  std::vector<std::size_t> out;
  out.reserve(percentages.size());
  for (double pct : percentages) {
    if (!(pct >= 0.0) || !std::isfinite(pct)) throw ConfigError("budget percentages must be >= 0");
    // Exact for integral percentages; long double keeps e.g. 2.5% of 1000 at 25.
    const long double raw = static_cast<long double>(pct) * static_cast<long double>(total) / 100.0L;
    out.push_back(static_cast<std::size_t>(std::floor(raw + 1e-9L)));
  }
  return out;
}

std::vector<double> default_C_grid() {
  std::vector<double> grid(20);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = std::pow(10.0, -4.0 + 6.0 * static_cast<double>(i) / 19.0);
  }
  return grid;
}

CvResult cross_validate_C(const MultitaskDataset& dataset, const RunConfig& base, std::span<const double> grid,
                          std::size_t folds, std::uint64_t seed, std::size_t workers) {
  if (grid.empty()) throw ConfigError("C grid is empty");
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  for (TaskId k = 0; k < dataset.task_count(); ++k) {
    if (dataset.tasks[k].train.size() < folds) {
      throw ConfigError("task " + std::to_string(k + 1) + " has " + std::to_string(dataset.tasks[k].train.size()) +
                        " training examples, fewer than " + std::to_string(folds) + " folds");
    }
  }

  // fold_of[k][i]: fold of task k's i-th training example.
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> fold_of(dataset.task_count());
  for (TaskId k = 0; k < dataset.task_count(); ++k) {
    const std::size_t n = dataset.tasks[k].train.size();
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
    fold_of[k].resize(n);
    for (std::size_t pos = 0; pos < n; ++pos) fold_of[k][perm[pos]] = pos % folds;
  }

  std::vector<MultitaskDataset> splits(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    auto& ds = splits[f];
    ds.name = dataset.name + "/fold" + std::to_string(f);
    ds.feature_count_hint = dataset.feature_count_hint;
    ds.tasks.resize(dataset.task_count());
    for (TaskId k = 0; k < dataset.task_count(); ++k) {
      const auto& train = dataset.tasks[k].train;
      for (std::size_t i = 0; i < train.size(); ++i) {
        (fold_of[k][i] == f ? ds.tasks[k].test : ds.tasks[k].train).push_back(train[i]);
      }
    }
  }

  std::vector<double> fold_accuracy(grid.size() * folds);
  parallel_for(fold_accuracy.size(), workers, [&](std::size_t cell) {
    const std::size_t g = cell / folds, f = cell % folds;
    RunConfig cfg = base;
    cfg.hyper.C = grid[g];
    cfg.seed = seed + f;
    cfg.record_trace = false;
    fold_accuracy[cell] = run_training(cfg, splits[f]).report.accuracy.micro;
  });

  CvResult result;
  result.grid.assign(grid.begin(), grid.end());
  result.mean_accuracy.resize(grid.size());
  std::optional<std::size_t> best;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) sum += fold_accuracy[g * folds + f];
    result.mean_accuracy[g] = sum / static_cast<double>(folds);
    if (!best || result.mean_accuracy[g] > result.mean_accuracy[*best] ||
        (result.mean_accuracy[g] == result.mean_accuracy[*best] && grid[g] < grid[*best])) {
      best = g;
    }
  }
  result.best_C = grid[*best];
  return result;
}

}  // namespace amlc
