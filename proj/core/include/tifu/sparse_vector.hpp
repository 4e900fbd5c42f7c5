#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tifu {

/// Item-indexed real vector over a fixed dimension. Entries are kept sorted by
/// index and exact zeros are never stored, so equality of two vectors is
/// equality of their entry lists.
class SparseVector {
 public:
  using Index = std::uint32_t;

  struct Entry {
    Index index;
    double value;
    bool operator==(const Entry&) const = default;
  };

  SparseVector() = default;
  explicit SparseVector(std::size_t dimension) : dimension_(dimension) {}

  /// Builds from arbitrary entries; duplicates are summed, zeros dropped.
  static SparseVector from_entries(std::size_t dimension, std::vector<Entry> entries);
  static SparseVector from_dense(std::span<const double> dense);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const Entry> entries() const noexcept { return entries_; }

  double operator[](Index index) const;
  void set(Index index, double value);

  std::vector<double> to_dense() const;

  double squared_norm() const noexcept;
  double max_abs() const noexcept;

  SparseVector& scale(double factor);
  SparseVector& divide(double divisor);

  bool operator==(const SparseVector&) const = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<Entry> entries_;

  friend SparseVector combine(double a, const SparseVector& x, double b, const SparseVector& y);
};

/// a*x + b*y. Both operands must share a dimension.
SparseVector combine(double a, const SparseVector& x, double b, const SparseVector& y);

inline SparseVector operator+(const SparseVector& x, const SparseVector& y) { return combine(1.0, x, 1.0, y); }
inline SparseVector operator-(const SparseVector& x, const SparseVector& y) { return combine(1.0, x, -1.0, y); }
inline SparseVector operator*(double s, SparseVector x) { return std::move(x.scale(s)); }

double dot(const SparseVector& x, const SparseVector& y);
double squared_distance(const SparseVector& x, const SparseVector& y);

/// Largest per-entry relative deviation of `actual` from `expected`. Entries
/// that are exactly zero in `expected` are measured against the largest
/// magnitude of `expected`, since a relative error against zero is undefined.
double max_relative_error(const SparseVector& actual, const SparseVector& expected);

}  // namespace tifu
