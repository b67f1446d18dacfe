#include "amlc/learners.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "amlc/errors.hpp"

namespace amlc {

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::amlc: return "amlc";
    case LearnerKind::independent: return "independent";
    case LearnerKind::random: return "random";
    case LearnerKind::peer: return "peer";
    case LearnerKind::peer_share: return "peer-share";
  }
  return "unknown";
}

std::optional<LearnerKind> parse_learner_kind(std::string_view name) {
  for (LearnerKind k : kAllLearners) {
    if (to_string(k) == name) return k;
  }
  if (name == "peer+share" || name == "peer_share") return LearnerKind::peer_share;
  return std::nullopt;
}

std::optional<Label> BudgetedOracle::query() {
  if (budget_ && used_ >= *budget_) {
    ++refused_;
    return std::nullopt;
  }
  ++used_;
  return truth_;
}

namespace {

RelationshipMatrix initial_tau(LearnerKind kind, std::size_t tasks) {
  switch (kind) {
    case LearnerKind::amlc:
      return RelationshipMatrix::uniform(tasks);
    case LearnerKind::peer:
    case LearnerKind::peer_share: {
      RelationshipMatrix tau(tasks, std::vector<double>(tasks * tasks, 0.0));
      const double u = 1.0 / static_cast<double>(tasks - 1);
      for (TaskId k = 0; k < tasks; ++k) {
        for (TaskId m = 0; m < tasks; ++m) {
          if (m != k) tau(k, m) = u;
        }
      }
      return tau;
    }
    default:
      return {};
  }
}

void check_task(const LearnerState& s, TaskId k) {
  if (k >= s.tasks()) {
    throw std::out_of_range("task index " + std::to_string(k) + " out of range for " +
                            std::to_string(s.tasks()) + " tasks");
  }
}

// Shared bookkeeping after the oracle answered. Returns whether the task's
// own prediction was wrong.
bool record_oracle_answer(LearnerState& s, StepOutcome& out, TaskId k, Label y) {
  out.queried_oracle = true;
  const bool wrong = y != out.prediction;
  out.mistake = wrong;
  ++s.counters.oracle_queries;
  if (wrong) ++s.counters.mistakes[k];
  return wrong;
}

// Queries the oracle; on refusal marks the outcome and returns nullopt.
std::optional<Label> ask(LabelOracle& oracle, StepOutcome& out) {
  auto y = oracle.query();
  if (!y) out.oracle_refused = true;
  return y;
}

void finish_updated(StepOutcome& out, bool own_update, TaskId k) {
  out.updated_tasks = out.shared_to;
  if (own_update) {
    out.updated_tasks.insert(std::lower_bound(out.updated_tasks.begin(), out.updated_tasks.end(), k), k);
  }
}

// Mistake-driven perceptron step on the task's own weights; used by
// Independent (query gated by confidence) and Random (query gated by a coin).
StepOutcome single_task_step(LearnerState& s, const SparseVector& x, TaskId k, LabelOracle& oracle,
                             bool coin) {
  check_task(s, k);
  StepOutcome out;
  const double p = dot(x, s.w.row(k));
  out.prediction = predict_sign(p);
  out.confidence = p;
  const double q = coin ? 0.5 : query_probability(s.hyper.b, p);
  if (!s.rng.bernoulli(q)) return out;

  auto y = ask(oracle, out);
  if (!y) return out;
  const bool wrong = record_oracle_answer(s, out, k, *y);
  if (wrong) axpy_into(to_real(*y), x, s.w.row(k));
  finish_updated(out, wrong, k);
  return out;
}

// PEER, optionally with data sharing after oracle queries.
StepOutcome peer_family_step(LearnerState& s, const SparseVector& x, TaskId k, LabelOracle& oracle,
                             bool share) {
  check_task(s, k);
  const std::size_t K = s.tasks();
  StepOutcome out;
  const double p_self = dot(x, s.w.row(k));
  out.prediction = predict_sign(p_self);
  out.confidence = p_self;
  // A confident task neither asks its peers nor learns.
  if (!s.rng.bernoulli(query_probability(s.hyper.b, p_self))) return out;

  std::vector<double> p(K);
  for (TaskId m = 0; m < K; ++m) p[m] = m == k ? p_self : dot(x, s.w.row(m));
  double p_peers = 0.0;
  for (TaskId m = 0; m < K; ++m) {
    if (m != k) p_peers += s.tau(k, m) * p[m];
  }

  if (!s.rng.bernoulli(query_probability(s.hyper.b2, p_peers))) {
    const Label pseudo = predict_sign(p_peers);
    out.queried_peer = true;
    ++s.counters.peer_queries;
    const bool disagree = out.prediction != pseudo;
    if (disagree) axpy_into(to_real(pseudo), x, s.w.row(k));
    finish_updated(out, disagree, k);
    return out;
  }

  auto y = ask(oracle, out);
  if (!y) return out;
  const bool wrong = record_oracle_answer(s, out, k, *y);
  if (wrong) axpy_into(to_real(*y), x, s.w.row(k));

  std::vector<double> peer_row;
  std::vector<double> peer_loss;
  peer_row.reserve(K - 1);
  peer_loss.reserve(K - 1);
  for (TaskId m = 0; m < K; ++m) {
    if (m == k) continue;
    peer_row.push_back(s.tau(k, m));
    peer_loss.push_back(hinge_from_confidence(p[m], *y));
  }
  auto updated = tau_row_update(peer_row, peer_loss, s.hyper.C);
  if (updated.underflow_reset) ++s.counters.tau_resets;
  for (TaskId m = 0, j = 0; m < K; ++m) {
    if (m != k) s.tau(k, m) = updated.row[j++];
  }

  if (share) {
    const double threshold = 1.0 / static_cast<double>(K - 1);
    for (TaskId m = 0; m < K; ++m) {
      if (m == k) continue;
      if (predict_sign(p[m]) != *y && s.tau(k, m) >= threshold) {
        axpy_into(to_real(*y), x, s.w.row(m));
        out.shared_to.push_back(m);
        ++s.counters.shares;
      }
    }
  }
  finish_updated(out, wrong, k);
  return out;
}

}  // namespace

LearnerState::LearnerState(LearnerKind kind_, std::size_t tasks, HyperParams hyper_, Rng rng_,
                           LearnerOptions options_)
    : kind(kind_), w(tasks), hyper(hyper_), options(options_), rng(rng_) {
  if (tasks == 0) throw ConfigError("a learner needs at least one task");
  if ((kind == LearnerKind::peer || kind == LearnerKind::peer_share) && tasks < 2) {
    throw ConfigError(std::string(to_string(kind)) + " needs at least two tasks");
  }
  hyper.validate();
  tau = initial_tau(kind, tasks);
  counters.mistakes.assign(tasks, 0);
}

StepOutcome amlc_step(LearnerState& s, const SparseVector& x, TaskId k, LabelOracle& oracle) {
  check_task(s, k);
  const std::size_t K = s.tasks();
  StepOutcome out;
  const std::vector<double> p = per_task_confidences(s.w, x);
  const double committee = committee_confidence(p, s.tau.row(k));
  out.prediction = predict_sign(committee);
  out.confidence = committee;
  if (!s.rng.bernoulli(query_probability(s.hyper.b, committee))) return out;

  auto y = ask(oracle, out);
  if (!y) return out;
  const bool wrong = record_oracle_answer(s, out, k, *y);
  if (wrong) axpy_into(to_real(*y), x, s.w.row(k));

  // Losses come from the confidences computed before this round's updates.
  std::vector<double> loss(K);
  for (TaskId m = 0; m < K; ++m) loss[m] = hinge_from_confidence(p[m], *y);
  auto updated = tau_row_update(s.tau.row(k), loss, s.hyper.C);
  if (updated.underflow_reset) ++s.counters.tau_resets;
  std::copy(updated.row.begin(), updated.row.end(), s.tau.row(k).begin());

  // Share with tasks that disagree and weigh at least as much as task k
  // in the updated committee.
  const Label target = s.options.share_against_true_label ? *y : out.prediction;
  const double self_weight = s.tau(k, k);
  for (TaskId m = 0; m < K; ++m) {
    if (m == k) continue;
    if (predict_sign(p[m]) != target && s.tau(k, m) >= self_weight) {
      axpy_into(to_real(*y), x, s.w.row(m));
      out.shared_to.push_back(m);
      ++s.counters.shares;
    }
  }
  finish_updated(out, wrong, k);
  return out;
}

StepOutcome independent_step(LearnerState& s, const SparseVector& x, TaskId k, LabelOracle& oracle) {
  return single_task_step(s, x, k, oracle, false);
}

StepOutcome random_step(LearnerState& s, const SparseVector& x, TaskId k, LabelOracle& oracle) {
  return single_task_step(s, x, k, oracle, true);
}

StepOutcome peer_step(LearnerState& s, const SparseVector& x, TaskId k, LabelOracle& oracle) {
  return peer_family_step(s, x, k, oracle, false);
}

StepOutcome peer_share_step(LearnerState& s, const SparseVector& x, TaskId k, LabelOracle& oracle) {
  return peer_family_step(s, x, k, oracle, true);
}

StepOutcome step(LearnerState& s, const SparseVector& x, TaskId k, LabelOracle& oracle) {
  switch (s.kind) {
    case LearnerKind::amlc: return amlc_step(s, x, k, oracle);
    case LearnerKind::independent: return independent_step(s, x, k, oracle);
    case LearnerKind::random: return random_step(s, x, k, oracle);
    case LearnerKind::peer: return peer_step(s, x, k, oracle);
    case LearnerKind::peer_share: return peer_share_step(s, x, k, oracle);
  }
  throw std::logic_error("unknown learner kind");
}

WeightMatrix finalize(const LearnerState& s) {
  if (s.kind == LearnerKind::amlc) return combine_model(s.tau, s.w);
  return s.w;
}

}  // namespace amlc
