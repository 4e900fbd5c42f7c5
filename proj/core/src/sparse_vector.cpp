#include "tifu/sparse_vector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tifu/error.hpp"

namespace tifu {

namespace {

void check_same_dimension(const SparseVector& x, const SparseVector& y) {
  if (x.dimension() != y.dimension()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dimensions " + std::to_string(x.dimension()) + " and " + std::to_string(y.dimension()));
  }
}

}  // namespace

SparseVector SparseVector::from_entries(std::size_t dimension, std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.index < b.index; });
  SparseVector out(dimension);
  out.entries_.reserve(entries.size());
  for (const Entry& e : entries) {
    if (e.index >= dimension) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "index " + std::to_string(e.index) + " >= dimension " + std::to_string(dimension));
    }
    if (!out.entries_.empty() && out.entries_.back().index == e.index) {
      out.entries_.back().value += e.value;
    } else {
      out.entries_.push_back(e);
    }
  }
  std::erase_if(out.entries_, [](const Entry& e) { return e.value == 0.0; });
  return out;
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector out(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) out.entries_.push_back({static_cast<Index>(i), dense[i]});
  }
  return out;
}

double SparseVector::operator[](Index index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const Entry& e, Index i) { return e.index < i; });
  return (it != entries_.end() && it->index == index) ? it->value : 0.0;
}

void SparseVector::set(Index index, double value) {
  if (index >= dimension_) {
    throw Error(ErrorCode::IndexOutOfRange,
                "index " + std::to_string(index) + " >= dimension " + std::to_string(dimension_));
  }
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const Entry& e, Index i) { return e.index < i; });
  const bool present = it != entries_.end() && it->index == index;
  if (value == 0.0) {
    if (present) entries_.erase(it);
  } else if (present) {
    it->value = value;
  } else {
    entries_.insert(it, {index, value});
  }
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> dense(dimension_, 0.0);
  for (const Entry& e : entries_) dense[e.index] = e.value;
  return dense;
}

double SparseVector::squared_norm() const noexcept {
  double sum = 0.0;
  for (const Entry& e : entries_) sum += e.value * e.value;
  return sum;
}

double SparseVector::max_abs() const noexcept {
  double m = 0.0;
  for (const Entry& e : entries_) m = std::max(m, std::abs(e.value));
  return m;
}

SparseVector& SparseVector::scale(double factor) {
  if (factor == 0.0) {
    entries_.clear();
    return *this;
  }
  for (Entry& e : entries_) e.value *= factor;
  std::erase_if(entries_, [](const Entry& e) { return e.value == 0.0; });
  return *this;
}

SparseVector& SparseVector::divide(double divisor) {
  for (Entry& e : entries_) e.value /= divisor;
  std::erase_if(entries_, [](const Entry& e) { return e.value == 0.0; });
  return *this;
}

SparseVector combine(double a, const SparseVector& x, double b, const SparseVector& y) {
  check_same_dimension(x, y);
  SparseVector out(x.dimension());
  auto& dst = out.entries_;
  dst.reserve(x.entries_.size() + y.entries_.size());
  auto xi = x.entries_.begin();
  auto yi = y.entries_.begin();
  auto push = [&dst](SparseVector::Index index, double value) {
    if (value != 0.0) dst.push_back({index, value});
  };
  while (xi != x.entries_.end() && yi != y.entries_.end()) {
    if (xi->index < yi->index) {
      push(xi->index, a * xi->value);
      ++xi;
    } else if (yi->index < xi->index) {
      push(yi->index, b * yi->value);
      ++yi;
    } else {
      push(xi->index, a * xi->value + b * yi->value);
      ++xi;
      ++yi;
    }
  }
  for (; xi != x.entries_.end(); ++xi) push(xi->index, a * xi->value);
  for (; yi != y.entries_.end(); ++yi) push(yi->index, b * yi->value);
  return out;
}

double dot(const SparseVector& x, const SparseVector& y) {
  check_same_dimension(x, y);
  auto xs = x.entries();
  auto ys = y.entries();
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    if (xs[i].index < ys[j].index) {
      ++i;
    } else if (ys[j].index < xs[i].index) {
      ++j;
    } else {
      sum += xs[i].value * ys[j].value;
      ++i;
      ++j;
    }
  }
  return sum;
}

double squared_distance(const SparseVector& x, const SparseVector& y) {
  const SparseVector d = x - y;
  return d.squared_norm();
}

double max_relative_error(const SparseVector& actual, const SparseVector& expected) {
  check_same_dimension(actual, expected);
  const double scale = expected.max_abs();
  double worst = 0.0;
  auto as = actual.entries();
  auto es = expected.entries();
  std::size_t i = 0, j = 0;
  auto against_zero = [&](double a) {
    if (a == 0.0) return 0.0;
    return scale > 0.0 ? std::abs(a) / scale : std::numeric_limits<double>::infinity();
  };
  while (i < as.size() || j < es.size()) {
    double err;
    if (j == es.size() || (i < as.size() && as[i].index < es[j].index)) {
      err = against_zero(as[i].value);
      ++i;
    } else if (i == as.size() || es[j].index < as[i].index) {
      err = 1.0;  // entry missing from `actual` entirely
      ++j;
    } else {
      err = std::abs(as[i].value - es[j].value) / std::abs(es[j].value);
      ++i;
      ++j;
    }
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace tifu
