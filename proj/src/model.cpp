#include "amlc/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "amlc/errors.hpp"

namespace amlc {

RelationshipMatrix::RelationshipMatrix(std::size_t tasks, std::vector<double> row_major)
    : tasks_(tasks), values_(std::move(row_major)) {
  if (values_.size() != tasks_ * tasks_) {
    throw std::invalid_argument("relationship matrix needs K*K values");
  }
}

RelationshipMatrix RelationshipMatrix::uniform(std::size_t tasks) {
  return RelationshipMatrix(tasks, std::vector<double>(tasks * tasks, 1.0 / static_cast<double>(tasks)));
}

RelationshipMatrix RelationshipMatrix::identity(std::size_t tasks) {
  std::vector<double> v(tasks * tasks, 0.0);
  for (std::size_t k = 0; k < tasks; ++k) v[k * tasks + k] = 1.0;
  return RelationshipMatrix(tasks, std::move(v));
}

bool RelationshipMatrix::is_row_stochastic(double tol) const {
  for (std::size_t k = 0; k < tasks_; ++k) {
    double s = 0.0;
    for (double v : row(k)) {
      if (!(v >= 0.0)) return false;
      s += v;
    }
    if (std::abs(s - 1.0) > tol) return false;
  }
  return true;
}

void HyperParams::validate() const {
  auto check = [](double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw ConfigError(std::string(name) + " must be a finite positive number, got " + std::to_string(v));
    }
  };
  check(b, "b");
  check(C, "C");
  check(b2, "b2");
}

double hinge_loss(const SparseVector& w, const SparseVector& x, Label y) {
  return hinge_from_confidence(dot(x, w), y);
}

std::vector<double> per_task_confidences(const WeightMatrix& w, const SparseVector& x) {
  std::vector<double> p(w.tasks());
  for (TaskId m = 0; m < w.tasks(); ++m) p[m] = dot(x, w.row(m));
  return p;
}

double committee_confidence(std::span<const double> p, std::span<const double> tau_row) {
  if (p.size() != tau_row.size()) throw std::invalid_argument("committee size mismatch");
  double sum = 0.0;
  for (std::size_t m = 0; m < p.size(); ++m) sum += p[m] * tau_row[m];
  return sum;
}

TauRowUpdate tau_row_update(std::span<const double> row, std::span<const double> losses, double C) {
  if (row.size() != losses.size()) throw std::invalid_argument("tau row and losses differ in size");
  TauRowUpdate out{std::vector<double>(row.begin(), row.end()), false};

  double lambda = 0.0;
  for (double l : losses) lambda += l;
  if (lambda == 0.0) return out;

  double total = 0.0;
  for (std::size_t m = 0; m < row.size(); ++m) {
    out.row[m] = row[m] * std::exp(-C * losses[m] / lambda);
    total += out.row[m];
  }
  if (total < 1e-300) {
    const double u = 1.0 / static_cast<double>(row.size());
    for (double& v : out.row) v = u;
    out.underflow_reset = true;
    return out;
  }
  for (double& v : out.row) v /= total;
  return out;
}

WeightMatrix combine_model(const RelationshipMatrix& tau, const WeightMatrix& w) {
  if (tau.tasks() != w.tasks()) throw std::invalid_argument("tau and w disagree on task count");
  WeightMatrix out(w.tasks());
  for (TaskId k = 0; k < w.tasks(); ++k) {
    SparseVector& acc = out.row(k);
    for (TaskId m = 0; m < w.tasks(); ++m) axpy_into(tau(k, m), w.row(m), acc);
  }
  return out;
}

}  // namespace amlc
