#include "amlc/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "amlc/data.hpp"
#include "amlc/errors.hpp"
#include "amlc/harness.hpp"
#include "amlc/io.hpp"
#include "amlc/report.hpp"

namespace amlc {
namespace {

namespace fs = std::filesystem;

std::size_t default_workers() {
  if (const char* env = std::getenv("AMLC_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("AMLC_WORKERS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

std::vector<LearnerKind> parse_learners(const std::vector<std::string>& names) {
  std::vector<LearnerKind> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.insert(out.end(), kAllLearners.begin(), kAllLearners.end());
      continue;
    }
    auto k = parse_learner_kind(n);
    if (!k) throw ConfigError("unknown learner '" + n + "' (amlc, independent, random, peer, peer-share, all)");
    out.push_back(*k);
  }
  if (out.empty()) throw ConfigError("no learner selected");
  return out;
}

bool uses_C(LearnerKind k) {
  return k == LearnerKind::amlc || k == LearnerKind::peer || k == LearnerKind::peer_share;
}

std::vector<std::uint64_t> seed_list(std::uint64_t first, std::size_t count) {
  if (count == 0) throw ConfigError("--seeds must be at least 1");
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = first + i;
  return seeds;
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// Options shared by the commands that run learners.
struct RunFlags {
  std::string data;
  double b = 1.0;
  double C = 1.0;
  double b2 = 1.0;
  std::uint64_t seed = 0;
  std::size_t seeds = 10;
  bool share_true = false;
  bool normalize = false;
  bool continue_after = false;
  bool cv = false;
  std::size_t folds = 10;
  std::uint64_t cv_seed = 0;
  std::vector<double> grid;
  std::optional<std::size_t> workers;

  void add_to(CLI::App* cmd, bool with_seeds = true) {
    cmd->add_option("--data", data, "Dataset manifest")->required();
    cmd->add_option("--b", b, "Query aggressiveness b")->capture_default_str();
    cmd->add_option("--C", C, "Committee learning rate C")->capture_default_str();
    cmd->add_option("--b2", b2, "Peer confidence threshold (PEER family)")->capture_default_str();
    if (with_seeds) {
      cmd->add_option("--seed", seed, "First run seed")->capture_default_str();
      cmd->add_option("--seeds", seeds, "Number of runs (seeds seed, seed+1, ...)")->capture_default_str();
    }
    cmd->add_flag("--share-against-true-label", share_true, "AMLC shares to peers that disagree with y");
    cmd->add_flag("--normalize", normalize, "L2-normalize every example");
    cmd->add_flag("--continue-after-budget", continue_after, "Keep streaming once the budget is spent");
    cmd->add_option("--workers", workers, "Parallel workers (default $AMLC_WORKERS or 1)");
  }

  void add_cv_to(CLI::App* cmd) {
    cmd->add_flag("--cv", cv, "Choose C per learner by cross-validation first");
    cmd->add_option("--folds", folds, "Cross-validation folds")->capture_default_str();
    cmd->add_option("--cv-seed", cv_seed, "Cross-validation seed")->capture_default_str();
    cmd->add_option("--grid", grid, "C grid (default: 20 values log-spaced over [1e-4, 1e2])")->delimiter(',');
  }

  RunConfig config(LearnerKind learner) const {
    RunConfig cfg;
    cfg.learner = learner;
    cfg.hyper = {b, C, b2};
    cfg.seed = seed;
    cfg.learner_options.share_against_true_label = share_true;
    cfg.normalize_examples = normalize;
    cfg.continue_after_budget = continue_after;
    cfg.validate();
    return cfg;
  }

  std::size_t worker_count() const { return workers ? std::max<std::size_t>(*workers, 1) : default_workers(); }

  std::vector<double> cv_grid() const {
    if (grid.empty()) return default_C_grid();
    for (double c : grid) HyperParams{1.0, c, 1.0}.validate();
    return grid;
  }

  // Replaces cfg.hyper.C by the cross-validated choice when --cv is set.
  void maybe_cross_validate(RunConfig& cfg, const MultitaskDataset& ds, std::ostream& out) const {
    if (!cv || !uses_C(cfg.learner)) return;
    const auto res = cross_validate_C(ds, cfg, cv_grid(), folds, cv_seed, worker_count());
    cfg.hyper.C = res.best_C;
    out << "cv: " << to_string(cfg.learner) << " C = " << format_real(res.best_C) << '\n';
  }
};

void print_table(std::ostream& out, std::span<const RunSummary> rows) {
  out << std::left << std::setw(13) << "learner" << std::setw(22) << "accuracy" << "queries\n";
  for (const auto& s : rows) {
    out << std::left << std::setw(13) << to_string(s.learner)
        << std::setw(22) << (fixed(s.accuracy_micro.mean, 4) + " +/- " + fixed(s.accuracy_micro.half_width, 4))
        << fixed(s.oracle_queries.mean, 1) << " +/- " << fixed(s.oracle_queries.half_width, 1) << '\n';
  }
}

int cmd_train(const RunFlags& f, const std::vector<std::string>& learner_names, std::optional<std::size_t> budget,
              std::optional<double> budget_pct, const std::string& out_dir, bool save_models, bool timing,
              std::ostream& out) {
  const auto learners = parse_learners(learner_names);
  std::vector<RunConfig> configs;
  for (auto k : learners) configs.push_back(f.config(k));
  const auto seeds = seed_list(f.seed, f.seeds);
  if (save_models && out_dir.empty()) throw ConfigError("--save-models needs --out-dir");
  const auto workers = f.worker_count();

  const MultitaskDataset ds = load_sparse_dataset(f.data);
  if (budget_pct) budget = budgets_from_percentages(std::span(&*budget_pct, 1), ds.train_size()).front();
  if (!out_dir.empty()) fs::create_directories(out_dir);

  std::vector<RunSummary> summaries;
  for (auto& cfg : configs) {
    cfg.oracle_budget = budget;
    f.maybe_cross_validate(cfg, ds, out);
    std::vector<TrainingResult> runs(seeds.size());
    parallel_for(seeds.size(), workers, [&](std::size_t i) {
      RunConfig c = cfg;
      c.seed = seeds[i];
      runs[i] = run_training(c, ds);
    });
    std::vector<RunReport> reports;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto stem = std::string(to_string(cfg.learner)) + "-seed" + std::to_string(seeds[i]);
      if (!out_dir.empty()) {
        write_file_atomic(fs::path(out_dir) / (stem + ".json"), run_report_json(runs[i].report, timing));
        if (save_models) {
          write_file_atomic(fs::path(out_dir) / ("model-" + stem + ".json"), model_json(runs[i].model, cfg.learner));
        }
      }
      reports.push_back(std::move(runs[i].report));
    }
    summaries.push_back(aggregate_runs(reports));
  }
  if (!out_dir.empty()) write_file_atomic(fs::path(out_dir) / "summary.json", summary_json(summaries, ds.name));
  out << "dataset " << ds.name << ": " << ds.task_count() << " tasks, " << ds.train_size() << " train, "
      << ds.test_size() << " test, " << seeds.size() << " run(s)\n";
  print_table(out, summaries);
  return kExitOk;
}

int cmd_evaluate(const std::string& data, const std::string& model_path, bool normalize, std::ostream& out) {
  MultitaskDataset ds = load_sparse_dataset(data);
  if (normalize) normalize_examples(ds);
  const WeightMatrix model = load_model(model_path);
  if (model.tasks() != ds.task_count()) {
    throw DataError("model has " + std::to_string(model.tasks()) + " tasks but the dataset has " +
                    std::to_string(ds.task_count()));
  }
  const Accuracy acc = evaluate(model, ds);
  for (TaskId k = 0; k < ds.task_count(); ++k) {
    out << "task " << (k + 1) << ": ";
    out << (acc.per_task[k] ? fixed(*acc.per_task[k], 4) : std::string("n/a")) << " (" << ds.tasks[k].test.size()
        << " test)\n";
  }
  out << "micro accuracy " << fixed(acc.micro, 4) << "\nmacro accuracy " << fixed(acc.macro, 4) << '\n';
  for (const auto& w : acc.warnings) out << "warning: " << w << '\n';
  return kExitOk;
}

int cmd_sweep(const RunFlags& f, const std::vector<std::string>& learner_names, std::vector<std::size_t> budgets,
              const std::vector<double>& pcts, const std::string& csv_path, std::ostream& out) {
  if (budgets.empty() == pcts.empty()) throw ConfigError("give exactly one of --budgets or --budget-pcts");
  const auto learners = parse_learners(learner_names);
  std::vector<RunConfig> templates;
  for (auto k : learners) templates.push_back(f.config(k));
  const auto seeds = seed_list(f.seed, f.seeds);
  const auto workers = f.worker_count();

  const MultitaskDataset ds = load_sparse_dataset(f.data);
  if (!pcts.empty()) budgets = budgets_from_percentages(pcts, ds.train_size());
  if (!std::is_sorted(budgets.begin(), budgets.end())) throw ConfigError("budgets must be ascending");
  for (auto& t : templates) f.maybe_cross_validate(t, ds, out);

  const auto sweep = budget_sweep(ds, templates, budgets, seeds, workers);
  const auto csv = sweep_csv(sweep);
  if (csv_path.empty() || csv_path == "-") {
    out << csv;
  } else {
    write_file_atomic(csv_path, csv);
  }
  out << std::left << std::setw(13) << "learner" << std::setw(8) << "budget" << std::setw(22) << "accuracy"
      << std::setw(16) << "queries" << "exhausted\n";
  for (const auto& r : sweep.summary) {
    out << std::left << std::setw(13) << to_string(r.learner) << std::setw(8) << r.budget << std::setw(22)
        << (fixed(r.accuracy_micro.mean, 4) + " +/- " + fixed(r.accuracy_micro.half_width, 4)) << std::setw(16)
        << fixed(r.oracle_queries.mean, 1) << r.exhausted_runs << "/" << r.runs << '\n';
  }
  return kExitOk;
}

int cmd_cv(const RunFlags& f, const std::string& learner_name, std::ostream& out) {
  const auto learners = parse_learners({learner_name});
  if (learners.size() != 1) throw ConfigError("cv takes a single learner");
  const RunConfig base = f.config(learners.front());
  const auto grid = f.cv_grid();
  const auto workers = f.worker_count();
  const MultitaskDataset ds = load_sparse_dataset(f.data);
  const auto res = cross_validate_C(ds, base, grid, f.folds, f.cv_seed, workers);
  out << std::left << std::setw(24) << "C" << "mean_accuracy\n";
  for (std::size_t i = 0; i < res.grid.size(); ++i) {
    out << std::left << std::setw(24) << format_real(res.grid[i]) << ' ' << fixed(res.mean_accuracy[i], 6) << '\n';
  }
  out << "best C = " << format_real(res.best_C) << '\n';
  return kExitOk;
}

int cmd_gen_synth(const SynthConfig& cfg, const std::string& out_dir, std::ostream& out) {
  cfg.validate();
  const MultitaskDataset ds = synth_clustered(cfg);
  fs::create_directories(out_dir);
  Manifest m;
  m.name = "synthetic";
  m.feature_count_hint = cfg.dim;
  for (TaskId k = 0; k < ds.task_count(); ++k) {
    std::ostringstream stem;
    stem << "task" << std::setw(3) << std::setfill('0') << (k + 1);
    ManifestTask t;
    t.train = stem.str() + ".train.svm";
    write_sparse_file(fs::path(out_dir) / *t.train, ds.tasks[k].train);
    if (!ds.tasks[k].test.empty()) {
      t.test = stem.str() + ".test.svm";
      write_sparse_file(fs::path(out_dir) / *t.test, ds.tasks[k].test);
    }
    m.tasks.push_back(std::move(t));
  }
  const auto manifest = fs::path(out_dir) / "dataset.manifest";
  write_manifest(manifest, m);
  out << "wrote " << ds.task_count() << " tasks (" << ds.train_size() << " train, " << ds.test_size()
      << " test) to " << manifest.string() << '\n';
  return kExitOk;
}

int cmd_validate_data(const std::string& data, std::ostream& out) {
  const MultitaskDataset ds = load_sparse_dataset(data);
  out << "dataset " << ds.name << '\n' << "tasks " << ds.task_count() << '\n';
  std::size_t pos_total = 0, n_total = 0;
  for (TaskId k = 0; k < ds.task_count(); ++k) {
    std::size_t pos = 0, n = 0;
    for (const auto* split : {&ds.tasks[k].train, &ds.tasks[k].test}) {
      for (const auto& e : *split) {
        pos += e.y == Label::positive;
        ++n;
      }
    }
    pos_total += pos;
    n_total += n;
    out << "task " << (k + 1) << ": train " << ds.tasks[k].train.size() << ", test " << ds.tasks[k].test.size()
        << ", positive " << fixed(static_cast<double>(pos) / static_cast<double>(n), 4) << '\n';
  }
  const auto extent = ds.feature_extent();
  out << "train total " << ds.train_size() << "\ntest total " << ds.test_size() << '\n';
  out << "max feature index " << (extent == 0 ? std::string("none") : std::to_string(extent - 1)) << '\n';
  if (ds.feature_count_hint) out << "feature count hint " << *ds.feature_count_hint << '\n';
  out << "positive fraction " << fixed(static_cast<double>(pos_total) / static_cast<double>(n_total), 4) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Active multitask learning with committees: training, evaluation and experiment harness", "amlc"};
  app.require_subcommand(1);

  RunFlags train_flags, sweep_flags, cv_flags;
  std::vector<std::string> train_learners{"amlc"}, sweep_learners{"all"};
  std::string cv_learner = "amlc";
  std::optional<std::size_t> train_budget;
  std::optional<double> train_budget_pct;
  std::string train_out_dir;
  bool save_models = false, timing = false;

  auto* train = app.add_subcommand("train", "Train learners over several seeds and print accuracy/query rows");
  train_flags.add_to(train);
  train_flags.add_cv_to(train);
  train->add_option("--learner", train_learners, "Learners (comma separated, or all)")->delimiter(',');
  auto* budget_opt = train->add_option("--budget", train_budget, "Oracle label budget");
  train->add_option("--budget-pct", train_budget_pct, "Budget as a percentage of the training set")
      ->excludes(budget_opt);
  train->add_option("--out-dir", train_out_dir, "Write per-run reports and summary.json here");
  train->add_flag("--save-models", save_models, "Also write each run's final model to --out-dir");
  train->add_flag("--timing", timing, "Include wall-clock time in run reports");

  std::string eval_data, eval_model;
  bool eval_normalize = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a saved model on a dataset's test splits");
  evaluate_cmd->add_option("--data", eval_data, "Dataset manifest")->required();
  evaluate_cmd->add_option("--model", eval_model, "Model JSON written by train --save-models")->required();
  evaluate_cmd->add_flag("--normalize", eval_normalize, "L2-normalize every example");

  std::vector<std::size_t> sweep_budgets;
  std::vector<double> sweep_pcts;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Accuracy against oracle budget for several learners");
  sweep_flags.add_to(sweep);
  sweep_flags.add_cv_to(sweep);
  sweep->add_option("--learners", sweep_learners, "Learners (comma separated, or all)")->delimiter(',');
  sweep->add_option("--budgets", sweep_budgets, "Absolute budgets, ascending")->delimiter(',');
  sweep->add_option("--budget-pcts", sweep_pcts, "Budgets as percentages of the training set")->delimiter(',');
  sweep->add_option("--out", sweep_out, "CSV output path (default stdout)");

  auto* cv = app.add_subcommand("cv", "Cross-validate C and print the grid");
  cv_flags.add_to(cv, false);
  cv_flags.add_cv_to(cv);
  cv->add_option("--learner", cv_learner, "Learner")->capture_default_str();

  SynthConfig synth;
  std::string synth_out;
  auto* gen = app.add_subcommand("gen-synth", "Write a synthetic clustered multitask dataset");
  gen->add_option("--tasks", synth.tasks)->capture_default_str();
  gen->add_option("--clusters", synth.clusters)->capture_default_str();
  gen->add_option("--dim", synth.dim)->capture_default_str();
  gen->add_option("--n-train", synth.n_train)->capture_default_str();
  gen->add_option("--n-test", synth.n_test)->capture_default_str();
  gen->add_option("--noise", synth.label_noise)->capture_default_str();
  gen->add_option("--jitter", synth.task_jitter)->capture_default_str();
  gen->add_option("--seed", synth.seed)->capture_default_str();
  gen->add_option("--out-dir", synth_out, "Output directory")->required();

  std::string validate_data;
  auto* validate = app.add_subcommand("validate-data", "Load a dataset and print its shape");
  validate->add_option("--data", validate_data, "Dataset manifest")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) {
      return cmd_train(train_flags, train_learners, train_budget, train_budget_pct, train_out_dir, save_models,
                       timing, out);
    }
    if (*evaluate_cmd) return cmd_evaluate(eval_data, eval_model, eval_normalize, out);
    if (*sweep) return cmd_sweep(sweep_flags, sweep_learners, sweep_budgets, sweep_pcts, sweep_out, out);
    if (*cv) return cmd_cv(cv_flags, cv_learner, out);
    if (*gen) return cmd_gen_synth(synth, synth_out, out);
    if (*validate) return cmd_validate_data(validate_data, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace amlc
