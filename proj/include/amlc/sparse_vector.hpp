#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace amlc {

using FeatureIndex = std::uint32_t;

struct SparseEntry {
  FeatureIndex index;
  double value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Sparse real vector stored as entries sorted by strictly increasing index.
///
/// Canonical form: no stored entry is exactly 0.0. Every mutating operation
/// restores it, so two vectors are equal iff their entry lists are equal.
/// Sums over entries always run in ascending index order, which makes the
/// result bit-identical to the same sum over a dense array.
class SparseVector {
 public:
  SparseVector() = default;

  /// Entries may arrive in any order; duplicates are summed, zeros dropped.
  SparseVector(std::initializer_list<std::pair<FeatureIndex, double>> entries);

  /// Builds from entries that are already strictly increasing in index.
  /// Zero values are dropped. Throws std::invalid_argument on an order violation.
  static SparseVector from_sorted(std::vector<SparseEntry> entries);

  /// Dense view of the first `dense.size()` coordinates; zeros are skipped.
  static SparseVector from_dense(std::span<const double> dense);

  std::span<const SparseEntry> entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Value at `index`, 0.0 when absent.
  double at(FeatureIndex index) const;

  /// One past the largest stored index, 0 for the zero vector.
  FeatureIndex extent() const { return entries_.empty() ? 0 : entries_.back().index + 1; }

  double squared_norm() const;

  /// Multiplies every entry by `alpha`; alpha == 0 clears the vector.
  void scale(double alpha);

  void clear() { entries_.clear(); }

  std::vector<double> to_dense(std::size_t dim) const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  friend void axpy_into(double alpha, const SparseVector& x, SparseVector& w);

  std::vector<SparseEntry> entries_;
};

/// Sum of a_i * b_i over shared indices, accumulated in ascending index
/// order. Walks the operand with fewer entries and searches the other.
double dot(const SparseVector& a, const SparseVector& b);

/// w <- w + alpha * x, pruning entries that become exactly zero.
void axpy_into(double alpha, const SparseVector& x, SparseVector& w);

}  // namespace amlc
