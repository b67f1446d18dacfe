// Acceptance runner: one PASS/FAIL/SKIP line per criterion, exit 1 on any FAIL.
// Set AMLC_LANDMINE_MANIFEST to a manifest of the real Landmine tasks to run
// the full-scale check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "amlc/data.hpp"
#include "amlc/harness.hpp"
#include "amlc/learners.hpp"
#include "amlc/model.hpp"
#include "amlc/report.hpp"
#include "amlc/sparse_vector.hpp"
#include "dense_oracle.hpp"
#include "fuzz_instances.hpp"

using namespace amlc;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
  Verdict verdict = Verdict::pass;
  std::string detail;
};

/// Collects failed sub-checks; the first few are kept for the report line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    if (failed_.size() < 3) failed_.push_back(what);
    ++failures_;
  }
  Outcome outcome(std::string summary) const {
    if (failures_ == 0) return {Verdict::pass, std::move(summary)};
    std::string d = std::to_string(failures_) + "/" + std::to_string(total_) + " checks failed:";
    for (const auto& f : failed_) d += " [" + f + "]";
    return {Verdict::fail, d};
  }
  std::size_t total() const { return total_; }

 private:
  std::size_t total_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> failed_;
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

bool uses_C(LearnerKind k) { return k == LearnerKind::amlc || k == LearnerKind::peer || k == LearnerKind::peer_share; }

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
  Checks c;
  Rng gen(2024);
  for (std::size_t K : {1u, 2u, 4u}) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const std::size_t D = 1 + gen.uniform_index(20);
      const std::size_t per_task = 1 + gen.uniform_index(200 / K);
      const auto in = testing::random_instance(gen, K, D, per_task);
      const double b = 0.25 + 2.0 * gen.uniform();
      const double C = std::pow(10.0, 4.0 * gen.uniform() - 2.0);
      const double b2 = 0.25 + 2.0 * gen.uniform();
      const std::optional<std::size_t> budget =
          gen.uniform() < 0.5 ? std::optional<std::size_t>(gen.uniform_index(K * per_task)) : std::nullopt;
      const bool cont = gen.uniform() < 0.3;
      const bool share_true = gen.uniform() < 0.5;
      for (LearnerKind kind : kAllLearners) {
        if (K < 2 && (kind == LearnerKind::peer || kind == LearnerKind::peer_share)) continue;
        RunConfig cfg;
        cfg.learner = kind;
        cfg.seed = seed;
        cfg.hyper = {b, C, b2};
        cfg.oracle_budget = budget;
        cfg.continue_after_budget = cont;
        cfg.learner_options.share_against_true_label = share_true;
        const auto diff = testing::compare_with_reference(cfg, in);
        c.expect(diff.empty(), std::string(to_string(kind)) + " K=" + std::to_string(K) + " seed=" +
                                   std::to_string(seed) + ": " + diff);
      }
    }
  }
  return c.outcome(std::to_string(c.total()) + " runs match the dense reference");
}

Outcome formula_suite() {
  Checks c;
  const SparseVector empty;
  c.expect(dot(empty, SparseVector{{0, 5.0}}) == 0.0, "dot with zero vector");
  c.expect(dot(SparseVector{{1, 2.0}, {3, -1.0}}, SparseVector{{3, 4.0}}) == -4.0, "dot one overlap");
  {
    SparseVector w;
    const SparseVector x{{1, 2.0}, {4, -3.0}};
    axpy_into(1.0, x, w);
    c.expect(w == x, "axpy into zero accumulator");
    SparseVector v{{2, 3.0}};
    axpy_into(-1.0, SparseVector{{2, 3.0}}, v);
    c.expect(v.empty(), "axpy exact cancellation");
    SparseVector u{{5, 1.0}};
    axpy_into(2.0, SparseVector{{0, 1.0}, {5, 0.5}}, u);
    c.expect(u == SparseVector{{0, 2.0}, {5, 2.0}}, "axpy merge");
  }
  c.expect(hinge_loss(empty, SparseVector{{0, 1.0}}, Label::positive) == 1.0, "hinge zero weights");
  c.expect(hinge_from_confidence(2.0, Label::positive) == 0.0, "hinge beyond margin");
  c.expect(hinge_from_confidence(0.5, Label::negative) == 1.5, "hinge negative label");
  {
    WeightMatrix w(2);
    c.expect(per_task_confidences(w, SparseVector{{0, 2.0}}) == std::vector<double>{0.0, 0.0}, "zero confidences");
    w.row(0) = SparseVector{{0, 1.0}};
    w.row(1) = SparseVector{{0, -1.0}};
    c.expect(per_task_confidences(w, SparseVector{{0, 2.0}}) == std::vector<double>{2.0, -2.0}, "confidences");
  }
  c.expect(committee_confidence(std::vector{2.0, -1.0}, std::vector{0.5, 0.5}) == 0.5, "uniform committee");
  c.expect(committee_confidence(std::vector{0.7, -3.0}, std::vector{1.0, 0.0}) == 0.7, "self committee");
  {
    Rng rng(5);
    bool ok = true;
    for (int t = 0; t < 100; ++t) {
      std::vector<double> p(3), tau(3);
      double s = 0.0;
      for (auto& v : p) v = rng.normal();
      for (auto& v : tau) s += (v = rng.uniform());
      for (auto& v : tau) v /= s;
      const double ref = tau[0] * p[0] + tau[1] * p[1] + tau[2] * p[2];
      ok = ok && near(committee_confidence(p, tau), ref, 1e-12);
    }
    c.expect(ok, "K=3 committee vs scalar oracle");
  }
  c.expect(predict_sign(0.5) == Label::positive, "sign(0.5)");
  c.expect(predict_sign(-0.5) == Label::negative, "sign(-0.5)");
  c.expect(predict_sign(0.0) == Label::positive, "sign(0)");
  c.expect(query_probability(1.0, 0.0) == 1.0, "P at p=0");
  c.expect(query_probability(1.0, 1.0) == 0.5 && query_probability(1.0, -1.0) == 0.5, "P at |p|=1");
  c.expect(near(query_probability(2.0, 3.0), 0.4, 1e-15), "P with b=2");
  {
    const std::vector<double> row{0.2, 0.3, 0.5};
    c.expect(tau_row_update(row, std::vector{0.0, 0.0, 0.0}, 1.0).row == row, "tau with zero losses");
    const auto out = tau_row_update(std::vector{0.5, 0.5}, std::vector{0.0, 2.0}, 1.0).row;
    c.expect(near(out[0], 0.731059, 1e-6) && near(out[1], 0.268941, 1e-6), "tau (0.731059, 0.268941)");
    c.expect(near(out[0] / out[1], std::exp(1.0), 1e-12), "tau ratio e");
  }
  {
    WeightMatrix w(1);
    w.row(0) = SparseVector{{3, 1.5}};
    c.expect(combine_model(RelationshipMatrix::uniform(1), w) == w, "combine K=1");
    WeightMatrix w3(3);
    w3.row(0) = SparseVector{{0, 1.0}};
    w3.row(2) = SparseVector{{1, -2.0}};
    c.expect(combine_model(RelationshipMatrix::identity(3), w3) == w3, "combine identity");
    const RelationshipMatrix tau(2, {0.25, 0.75, 0.6, 0.4});
    WeightMatrix w2(2);
    w2.row(0) = SparseVector{{0, 1.0}, {2, 2.0}};
    w2.row(1) = SparseVector{{2, -1.0}, {3, 4.0}};
    const auto m = combine_model(tau, w2);
    const std::vector<double> r0{0.25, 0.0, 0.25 * 2.0 + 0.75 * -1.0, 0.75 * 4.0};
    const std::vector<double> r1{0.6, 0.0, 0.6 * 2.0 + 0.4 * -1.0, 0.4 * 4.0};
    c.expect(m.row(0).to_dense(4) == r0 && m.row(1).to_dense(4) == r1, "combine K=2 dense oracle");
  }
  {
    LearnerState s(LearnerKind::amlc, 3, {}, Rng(1));
    BudgetedOracle oracle;
    oracle.present(Label::negative);
    const SparseVector x{{0, 1.0}, {3, -2.0}};
    const auto out = amlc_step(s, x, 1, oracle);
    bool uniform = true;
    for (double v : s.tau.values()) uniform = uniform && near(v, 1.0 / 3.0, 1e-15);
    c.expect(out.queried_oracle && out.prediction == Label::positive && out.mistake == true &&
                 out.shared_to.empty() && s.w.row(1) == SparseVector{{0, -1.0}, {3, 2.0}} && uniform,
             "first AMLC round");
  }
  {
    const auto two = mean_ci95(std::vector{0.8, 1.0});
    c.expect(near(two.mean, 0.9, 1e-12) && near(two.half_width, 0.196, 1e-3), "CI half-width 0.196");
    c.expect(mean_ci95(std::vector{0.6, 0.6, 0.6}).half_width == 0.0, "CI of identical reports");
  }
  return c.outcome(std::to_string(c.total()) + " formula examples hold");
}

Outcome invariant_fuzz() {
  Checks c;
  Rng rng(31337);
  std::size_t tau_bad = 0, ratio_bad = 0;
  for (int trial = 0; trial < 10'000; ++trial) {
    const std::size_t K = 1 + rng.uniform_index(12);
    std::vector<double> row(K), loss(K);
    double total = 0.0;
    for (std::size_t m = 0; m < K; ++m) {
      total += (row[m] = rng.uniform() + 1e-6);
      loss[m] = rng.uniform() < 0.25 ? 0.0 : 4.0 * rng.uniform();
    }
    for (auto& v : row) v /= total;
    const double C = std::pow(10.0, 6.0 * rng.uniform() - 4.0);
    const auto out = tau_row_update(row, loss, C).row;
    double sum = 0.0;
    bool nonneg = true;
    for (double v : out) {
      sum += v;
      nonneg = nonneg && v >= 0.0;
    }
    if (!(near(sum, 1.0, 1e-12) && nonneg)) ++tau_bad;
    for (std::size_t m = 0; m < K; ++m) {
      for (std::size_t j = 0; j < K; ++j) {
        if (loss[m] < loss[j] && out[j] > 0.0 && !(out[m] / out[j] > row[m] / row[j])) ++ratio_bad;
      }
    }
  }
  c.expect(tau_bad == 0, std::to_string(tau_bad) + " non-stochastic rows");
  c.expect(ratio_bad == 0, std::to_string(ratio_bad) + " monotone-trust violations");

  std::size_t algebra_bad = 0;
  for (int trial = 0; trial < 10'000; ++trial) {
    const std::size_t dim = 1 + rng.uniform_index(64);
    const auto a = testing::random_dense(rng, dim, rng.uniform());
    const auto b = testing::random_dense(rng, dim, rng.uniform());
    const auto sa = SparseVector::from_dense(a);
    auto sb = SparseVector::from_dense(b);
    const double alpha = rng.normal();
    bool ok = near(dot(sa, sb), testing::dense_dot(a, b), 1e-12);
    axpy_into(alpha, sa, sb);
    const auto got = sb.to_dense(dim);
    for (std::size_t i = 0; i < dim; ++i) ok = ok && near(got[i], b[i] + alpha * a[i], 1e-12);
    ok = ok && testing::canonical(sb);
    if (!ok) ++algebra_bad;
  }
  c.expect(algebra_bad == 0, std::to_string(algebra_bad) + " sparse/dense mismatches");
  return c.outcome("10000 tau updates and 10000 sparse/dense checks");
}

Outcome single_task_reduction() {
  Checks c;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthConfig sc;
    sc.tasks = 1;
    sc.clusters = 1;
    sc.seed = seed;
    const auto ds = synth_clustered(sc);
    RunConfig cfg;
    cfg.seed = seed;
    cfg.record_trace = true;
    cfg.hyper.C = 0.1 + static_cast<double>(seed);
    const auto a = run_training(cfg, ds);
    cfg.learner = LearnerKind::independent;
    const auto b = run_training(cfg, ds);
    c.expect(a.trace == b.trace && a.weights == b.weights && a.model == b.model &&
                 a.report.oracle_queries == b.report.oracle_queries && a.report.accuracy == b.report.accuracy,
             "seed " + std::to_string(seed));
  }
  return c.outcome("AMLC equals Independent on 20 single-task seeds");
}

// Shared by the query-savings check and the budget sweep.
struct SyntheticSetup {
  MultitaskDataset ds;
  std::vector<RunConfig> templates;  ///< kAllLearners order, C chosen by CV
  std::vector<std::uint64_t> seeds;
  std::string c_summary;
};

const SyntheticSetup& synthetic_setup() {
  static const SyntheticSetup setup = [] {
    SyntheticSetup s;
    SynthConfig sc;  // K=10, 2 clusters, D=20, 100/300 per task, noise 0.05, jitter 0.1
    s.ds = synth_clustered(sc);
    s.seeds.resize(10);
    std::iota(s.seeds.begin(), s.seeds.end(), 0);
    const auto grid = default_C_grid();
    for (LearnerKind kind : kAllLearners) {
      RunConfig cfg;
      cfg.learner = kind;
      if (uses_C(kind)) {
        cfg.hyper.C = cross_validate_C(s.ds, cfg, grid, 10, 0).best_C;
        s.c_summary += std::string(s.c_summary.empty() ? "" : ", ") + std::string(to_string(kind)) + " C=" +
                       fmt(cfg.hyper.C, 4);
      }
      s.templates.push_back(cfg);
    }
    return s;
  }();
  return setup;
}

RunSummary summarize(const MultitaskDataset& ds, RunConfig cfg, std::span<const std::uint64_t> seeds) {
  std::vector<RunReport> reports(seeds.size());
  parallel_for(seeds.size(), 1, [&](std::size_t i) {
    RunConfig c = cfg;
    c.seed = seeds[i];
    reports[i] = run_training(c, ds).report;
  });
  return aggregate_runs(reports);
}

Outcome synthetic_reproduction() {
  const auto& s = synthetic_setup();
  const auto amlc = summarize(s.ds, s.templates[4], s.seeds);
  const auto indep = summarize(s.ds, s.templates[1], s.seeds);
  const double ratio = amlc.oracle_queries.mean / indep.oracle_queries.mean;
  const double gap = amlc.accuracy_micro.mean - indep.accuracy_micro.mean;
  Checks c;
  c.expect(ratio <= 0.6, "query ratio " + fmt(ratio, 3) + " > 0.6");
  c.expect(gap >= -0.02, "accuracy gap " + fmt(gap, 4) + " < -0.02");
  const std::string numbers = "AMLC " + fmt(amlc.accuracy_micro.mean) + " acc / " + fmt(amlc.oracle_queries.mean, 1) +
                              " queries, Independent " + fmt(indep.accuracy_micro.mean) + " / " +
                              fmt(indep.oracle_queries.mean, 1) + " (ratio " + fmt(ratio, 3) + ", " + s.c_summary +
                              ")";
  auto out = c.outcome(numbers);
  if (out.verdict == Verdict::fail) out.detail += "; " + numbers;
  return out;
}

SweepResult& sweep_cache() {
  static SweepResult sweep;
  return sweep;
}

Outcome budget_sweep_dominance() {
  const auto& s = synthetic_setup();
  const std::vector<double> pcts{2, 4, 6, 8, 10};
  const auto budgets = budgets_from_percentages(pcts, s.ds.train_size());
  sweep_cache() = budget_sweep(s.ds, s.templates, budgets, s.seeds);
  Checks c;
  std::ostringstream table;
  for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
    double amlc_acc = 0.0;
    std::vector<std::pair<LearnerKind, double>> others;
    for (const auto& row : sweep_cache().summary) {
      if (row.budget != budgets[bi]) continue;
      if (row.learner == LearnerKind::amlc) {
        amlc_acc = row.accuracy_micro.mean;
      } else {
        others.emplace_back(row.learner, row.accuracy_micro.mean);
      }
    }
    table << (bi ? ", " : "") << budgets[bi] << ":" << fmt(amlc_acc, 3);
    for (const auto& [kind, acc] : others) {
      c.expect(amlc_acc >= acc - 0.02, "budget " + std::to_string(budgets[bi]) + " AMLC " + fmt(amlc_acc) + " vs " +
                                           std::string(to_string(kind)) + " " + fmt(acc));
    }
  }
  return c.outcome("AMLC accuracy by budget " + table.str());
}

Outcome landmine() {
  const char* manifest = std::getenv("AMLC_LANDMINE_MANIFEST");
  if (manifest == nullptr || *manifest == '\0') return {Verdict::skip, "AMLC_LANDMINE_MANIFEST not set"};
  const auto ds = load_sparse_dataset(manifest);
  RunConfig cfg;
  cfg.hyper.C = cross_validate_C(ds, cfg, default_C_grid(), 10, 0).best_C;
  std::vector<std::uint64_t> seeds(10);
  std::iota(seeds.begin(), seeds.end(), 0);
  const auto sum = summarize(ds, cfg, seeds);
  Checks c;
  c.expect(sum.accuracy_micro.mean >= 0.92, "accuracy " + fmt(sum.accuracy_micro.mean));
  c.expect(sum.oracle_queries.mean <= 400.0, "queries " + fmt(sum.oracle_queries.mean, 1));
  return c.outcome("accuracy " + fmt(sum.accuracy_micro.mean) + ", queries " + fmt(sum.oracle_queries.mean, 1) +
                   ", C=" + fmt(cfg.hyper.C));
}

Outcome determinism_and_budget_law() {
  Checks c;
  SynthConfig sc;
  sc.seed = 7;
  sc.n_train = 60;
  sc.n_test = 50;
  const auto ds = synth_clustered(sc);
  for (LearnerKind kind : kAllLearners) {
    for (std::optional<std::size_t> budget : {std::optional<std::size_t>{}, std::optional<std::size_t>{25}}) {
      RunConfig cfg;
      cfg.learner = kind;
      cfg.seed = 11;
      cfg.oracle_budget = budget;
      const auto a = run_report_json(run_training(cfg, ds).report);
      const auto b = run_report_json(run_training(cfg, ds).report);
      c.expect(a == b, std::string(to_string(kind)) + " report differs between identical runs");
    }
  }
  std::size_t cells = 0;
  for (const auto& row : sweep_cache().rows) {
    ++cells;
    c.expect(row.oracle_queries <= row.budget, std::string(to_string(row.learner)) + " exceeded budget " +
                                                   std::to_string(row.budget));
  }
  c.expect(cells > 0, "budget sweep produced no rows");

  std::vector<RunConfig> templates;
  for (LearnerKind kind : kAllLearners) {
    RunConfig cfg;
    cfg.learner = kind;
    cfg.continue_after_budget = true;
    templates.push_back(cfg);
  }
  const std::vector<std::size_t> budgets{0, 1, 7, 40, 150};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  for (const auto& row : budget_sweep(ds, templates, budgets, seeds).rows) {
    ++cells;
    c.expect(row.oracle_queries <= row.budget, "continued run exceeded budget");
  }
  return c.outcome("reports byte-identical; " + std::to_string(cells) + " sweep cells within budget");
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  ///< 0 means no bound
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "oracle equivalence", 10.0, oracle_equivalence},
      {2, "formula suite", 0.0, formula_suite},
      {3, "invariant fuzz", 0.0, invariant_fuzz},
      {4, "single-task reduction", 5.0, single_task_reduction},
      {5, "synthetic query savings", 120.0, synthetic_reproduction},
      {6, "budget-sweep dominance", 300.0, budget_sweep_dominance},
      {7, "landmine full scale", 0.0, landmine},
      {8, "determinism and budget law", 0.0, determinism_and_budget_law},
  };
  int failures = 0;
  for (const auto& crit : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = crit.run();
    } catch (const std::exception& e) {
      out = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.verdict != Verdict::skip && crit.limit_seconds > 0.0 && secs > crit.limit_seconds) {
      out = {Verdict::fail, "took " + fmt(secs, 1) + " s, limit " + fmt(crit.limit_seconds, 0) + " s; " + out.detail};
    }
    const char* tag = out.verdict == Verdict::pass ? "PASS" : out.verdict == Verdict::fail ? "FAIL" : "SKIP";
    std::printf("%s  %d %-28s %7.2fs  %s\n", tag, crit.id, crit.name, secs, out.detail.c_str());
    std::fflush(stdout);
    failures += out.verdict == Verdict::fail;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
