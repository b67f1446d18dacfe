#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "amlc/sparse_vector.hpp"

namespace amlc {

enum class Label : std::int8_t { negative = -1, positive = 1 };

inline double to_real(Label y) { return y == Label::positive ? 1.0 : -1.0; }

/// Zero-based task index. Files and reports use 1-based task ids.
using TaskId = std::size_t;

/// K x K committee weights, row-major. Row k is task k's committee.
class RelationshipMatrix {
 public:
  RelationshipMatrix() = default;
  RelationshipMatrix(std::size_t tasks, std::vector<double> row_major);

  /// Every entry 1/K.
  static RelationshipMatrix uniform(std::size_t tasks);
  static RelationshipMatrix identity(std::size_t tasks);

  std::size_t tasks() const { return tasks_; }
  std::span<const double> row(TaskId k) const { return {values_.data() + k * tasks_, tasks_}; }
  std::span<double> row(TaskId k) { return {values_.data() + k * tasks_, tasks_}; }
  double operator()(TaskId k, TaskId m) const { return values_[k * tasks_ + m]; }
  double& operator()(TaskId k, TaskId m) { return values_[k * tasks_ + m]; }
  std::span<const double> values() const { return values_; }

  /// Entries non-negative and each row sums to 1 within `tol`.
  bool is_row_stochastic(double tol = 1e-9) const;

  friend bool operator==(const RelationshipMatrix&, const RelationshipMatrix&) = default;

 private:
  std::size_t tasks_ = 0;
  std::vector<double> values_;
};

/// One sparse weight vector per task.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  explicit WeightMatrix(std::size_t tasks) : rows_(tasks) {}
  explicit WeightMatrix(std::vector<SparseVector> rows) : rows_(std::move(rows)) {}

  std::size_t tasks() const { return rows_.size(); }
  const SparseVector& row(TaskId k) const { return rows_[k]; }
  SparseVector& row(TaskId k) { return rows_[k]; }
  std::span<const SparseVector> rows() const { return rows_; }

  friend bool operator==(const WeightMatrix&, const WeightMatrix&) = default;

 private:
  std::vector<SparseVector> rows_;
};

struct HyperParams {
  double b = 1.0;   ///< query aggressiveness for the task's own confidence
  double C = 1.0;   ///< committee learning rate
  double b2 = 1.0;  ///< peer-confidence query threshold (PEER family only)

  /// Throws ConfigError unless every parameter is finite and positive.
  void validate() const;
};

/// (1 - y * <x, w>)_+
double hinge_loss(const SparseVector& w, const SparseVector& x, Label y);

/// Hinge loss given an already computed confidence p = <x, w>.
inline double hinge_from_confidence(double p, Label y) {
  const double margin = 1.0 - to_real(y) * p;
  return margin > 0.0 ? margin : 0.0;
}

/// Element m is <x, w_m>.
std::vector<double> per_task_confidences(const WeightMatrix& w, const SparseVector& x);

/// Sum over m of p[m] * tau_row[m], accumulated in task order.
double committee_confidence(std::span<const double> p, std::span<const double> tau_row);

/// sign with sign(0) = +1.
inline Label predict_sign(double p) { return p >= 0.0 ? Label::positive : Label::negative; }

/// b / (b + |p|)
inline double query_probability(double b, double p) { return b / (b + (p < 0.0 ? -p : p)); }

struct TauRowUpdate {
  std::vector<double> row;
  /// The multiplied row summed below 1e-300 and was reset to uniform.
  bool underflow_reset = false;
};

/// Multiplicative committee update: entry m is scaled by exp(-C * loss_m / lambda)
/// with lambda = sum of losses, then the row is renormalized. A zero lambda
/// leaves the row untouched.
TauRowUpdate tau_row_update(std::span<const double> row, std::span<const double> losses, double C);

/// Row k of the result is sum_m tau(k, m) * w_m.
WeightMatrix combine_model(const RelationshipMatrix& tau, const WeightMatrix& w);

}  // namespace amlc
