#include "amlc/sparse_vector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amlc {

namespace {

bool index_less(const SparseEntry& e, FeatureIndex i) { return e.index < i; }

// First position in [first, last) whose index is >= target. Gallops from
// `first` so a monotone sequence of lookups costs O(n log(m/n)) overall.
template <typename Ptr>
Ptr gallop(Ptr first, Ptr last, FeatureIndex target) {
  std::ptrdiff_t step = 1;
  Ptr lo = first;
  while (lo + step < last && (lo + step)->index < target) {
    lo += step;
    step *= 2;
  }
  Ptr hi = std::min(lo + step + 1, last);
  return std::lower_bound(lo, hi, target, index_less);
}

}  // namespace

SparseVector::SparseVector(std::initializer_list<std::pair<FeatureIndex, double>> entries) {
  std::vector<SparseEntry> raw;
  raw.reserve(entries.size());
  for (const auto& [i, v] : entries) raw.push_back({i, v});
  std::stable_sort(raw.begin(), raw.end(),
                   [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  for (const auto& e : raw) {
    if (!entries_.empty() && entries_.back().index == e.index) {
      entries_.back().value += e.value;
    } else {
      entries_.push_back(e);
    }
  }
  std::erase_if(entries_, [](const SparseEntry& e) { return e.value == 0.0; });
}

SparseVector SparseVector::from_sorted(std::vector<SparseEntry> entries) {
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].index <= entries[i - 1].index) {
      throw std::invalid_argument("sparse entries must have strictly increasing indices");
    }
  }
  std::erase_if(entries, [](const SparseEntry& e) { return e.value == 0.0; });
  SparseVector out;
  out.entries_ = std::move(entries);
  return out;
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector out;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) out.entries_.push_back({static_cast<FeatureIndex>(i), dense[i]});
  }
  return out;
}

double SparseVector::at(FeatureIndex index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index, index_less);
  return (it != entries_.end() && it->index == index) ? it->value : 0.0;
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value * e.value;
  return s;
}

void SparseVector::scale(double alpha) {
  for (auto& e : entries_) e.value *= alpha;
  // alpha == 0 or underflow can produce zeros.
  std::erase_if(entries_, [](const SparseEntry& e) { return e.value == 0.0; });
}

std::vector<double> SparseVector::to_dense(std::size_t dim) const {
  std::vector<double> out(dim, 0.0);
  for (const auto& e : entries_) {
    if (e.index < dim) out[e.index] = e.value;
  }
  return out;
}

double dot(const SparseVector& a, const SparseVector& b) {
  auto small = a.entries();
  auto large = b.entries();
  if (small.size() > large.size()) std::swap(small, large);
  if (small.empty()) return 0.0;

  double sum = 0.0;
  const SparseEntry* cursor = large.data();
  const SparseEntry* const end = large.data() + large.size();
  for (const auto& e : small) {
    cursor = gallop(cursor, end, e.index);
    if (cursor == end) break;
    if (cursor->index == e.index) sum += e.value * cursor->value;
  }
  return sum;
}

void axpy_into(double alpha, const SparseVector& x, SparseVector& w) {
  if (alpha == 0.0 || x.empty()) return;
  auto& out = w.entries_;

  // Fast path: every index of x is already stored in w, update in place.
  {
    std::vector<SparseEntry*> slots;
    slots.reserve(x.nnz());
    SparseEntry* cursor = out.data();
    SparseEntry* const end = out.data() + out.size();
    bool all_present = true;
    for (const auto& e : x.entries()) {
      cursor = gallop(cursor, end, e.index);
      if (cursor == end || cursor->index != e.index) {
        all_present = false;
        break;
      }
      slots.push_back(cursor);
    }
    if (all_present) {
      bool zeroed = false;
      auto xs = x.entries();
      for (std::size_t i = 0; i < xs.size(); ++i) {
        slots[i]->value += alpha * xs[i].value;
        zeroed |= slots[i]->value == 0.0;
      }
      if (zeroed) std::erase_if(out, [](const SparseEntry& e) { return e.value == 0.0; });
      return;
    }
  }

  std::vector<SparseEntry> merged;
  merged.reserve(out.size() + x.nnz());
  auto wi = out.begin();
  for (const auto& e : x.entries()) {
    while (wi != out.end() && wi->index < e.index) merged.push_back(*wi++);
    if (wi != out.end() && wi->index == e.index) {
      double v = wi->value + alpha * e.value;
      if (v != 0.0) merged.push_back({e.index, v});
      ++wi;
    } else {
      double v = alpha * e.value;
      if (v != 0.0) merged.push_back({e.index, v});
    }
  }
  merged.insert(merged.end(), wi, out.end());
  out = std::move(merged);
}

}  // namespace amlc
