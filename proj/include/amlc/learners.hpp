#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "amlc/model.hpp"
#include "amlc/rng.hpp"
#include "amlc/sparse_vector.hpp"

namespace amlc {

enum class LearnerKind { amlc, independent, random, peer, peer_share };

inline constexpr std::array<LearnerKind, 5> kAllLearners = {
    LearnerKind::random, LearnerKind::independent, LearnerKind::peer, LearnerKind::peer_share,
    LearnerKind::amlc};

std::string_view to_string(LearnerKind kind);
/// Accepts the names produced by to_string ("amlc", "peer-share", ...).
std::optional<LearnerKind> parse_learner_kind(std::string_view name);

/// Source of true labels for the example currently being processed.
class LabelOracle {
 public:
  virtual ~LabelOracle() = default;
  /// The true label, or nullopt when no more labels may be requested.
  virtual std::optional<Label> query() = 0;
};

/// Oracle over a simulated stream: the driver presents each example's label
/// before the step, and requests beyond `budget` are refused.
class BudgetedOracle final : public LabelOracle {
 public:
  explicit BudgetedOracle(std::optional<std::size_t> budget = std::nullopt) : budget_(budget) {}

  void present(Label truth) { truth_ = truth; }
  std::optional<Label> query() override;

  std::size_t used() const { return used_; }
  std::size_t refused() const { return refused_; }
  std::optional<std::size_t> budget() const { return budget_; }

 private:
  std::optional<std::size_t> budget_;
  std::size_t used_ = 0;
  std::size_t refused_ = 0;
  Label truth_ = Label::positive;
};

struct StepOutcome {
  Label prediction = Label::positive;
  /// Confidence the prediction was made from (committee, or the task's own).
  double confidence = 0.0;
  bool queried_oracle = false;
  bool queried_peer = false;
  /// Set iff queried_oracle.
  std::optional<bool> mistake;
  /// The learner asked the oracle for a label and was refused.
  bool oracle_refused = false;
  /// Ascending task indices.
  std::vector<TaskId> shared_to;
  std::vector<TaskId> updated_tasks;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

struct LearnerOptions {
  /// AMLC sharing compares peers against the true label instead of the
  /// committee prediction.
  bool share_against_true_label = false;
};

struct LearnerCounters {
  std::size_t oracle_queries = 0;
  std::size_t peer_queries = 0;
  std::size_t shares = 0;
  std::size_t tau_resets = 0;
  std::vector<std::size_t> mistakes;  ///< per task, on oracle-queried rounds
};

/// Everything one online learner carries between rounds.
///
/// AMLC starts with tau uniform (1/K). The PEER family keeps tau over peers
/// only: the diagonal stays 0 and off-diagonal rows start at 1/(K-1).
/// Independent and Random have no tau.
struct LearnerState {
  LearnerState(LearnerKind kind, std::size_t tasks, HyperParams hyper, Rng rng,
               LearnerOptions options = {});

  LearnerKind kind;
  WeightMatrix w;
  RelationshipMatrix tau;
  HyperParams hyper;
  LearnerOptions options;
  Rng rng;
  LearnerCounters counters;

  std::size_t tasks() const { return w.tasks(); }
};

// Each step consumes the documented RNG draws: AMLC, Independent and Random
// exactly one; PEER and PEER+Share one, or two when the task is unconfident.
StepOutcome amlc_step(LearnerState& state, const SparseVector& x, TaskId k, LabelOracle& oracle);
StepOutcome independent_step(LearnerState& state, const SparseVector& x, TaskId k, LabelOracle& oracle);
StepOutcome random_step(LearnerState& state, const SparseVector& x, TaskId k, LabelOracle& oracle);
StepOutcome peer_step(LearnerState& state, const SparseVector& x, TaskId k, LabelOracle& oracle);
StepOutcome peer_share_step(LearnerState& state, const SparseVector& x, TaskId k, LabelOracle& oracle);

/// Dispatches on state.kind.
StepOutcome step(LearnerState& state, const SparseVector& x, TaskId k, LabelOracle& oracle);

/// Test-time model: tau * w for AMLC, w for everything else.
WeightMatrix finalize(const LearnerState& state);

}  // namespace amlc
