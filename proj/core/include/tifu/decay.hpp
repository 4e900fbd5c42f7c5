#pragma once

// Maintenance rules for the time-decayed average
//
//   avg_n = (1/n) * sum_{i=1..n} r^(n-i) * x_i
//
// of a series of vectors. The same rules drive group vectors (series of
// basket vectors, rate r_b) and user vectors (series of group vectors,
// rate r_g). Scalars are one-dimensional vectors.

#include <cmath>
#include <cstddef>
#include <functional>
#include <ranges>
#include <span>
#include <string>

#include "tifu/error.hpp"
#include "tifu/sparse_vector.hpp"

namespace tifu::decay {

struct DecayedAverage {
  SparseVector value;
  std::size_t count = 0;
  double rate = 1.0;

  static DecayedAverage empty(std::size_t dimension, double rate);

  std::size_t dimension() const noexcept { return value.dimension(); }
  bool operator==(const DecayedAverage&) const = default;
};

/// Counts series elements read by an update, i.e. the work behind it.
struct WorkMeter {
  std::size_t touched = 0;
};

void check_rate(double rate);

/// Brute-force definition. Used as the oracle for every rule below.
SparseVector decayed_average(std::span<const SparseVector> series, double rate);

/// Appends x_new: (r*n*avg + x_new) / (n+1).
DecayedAverage incr_update(const DecayedAverage& avg, const SparseVector& x_new);

/// Replaces the element `position_from_end` steps before the newest one
/// (0 = newest): (n*avg + r^p * (x_new - x_old)) / n.
DecayedAverage inplace_update(const DecayedAverage& avg, std::size_t position_from_end,
                              const SparseVector& x_old, const SparseVector& x_new);

/// Removes tail[0] given the series slice tail = [x_i, ..., x_n]:
///
///   (n*avg + D(tail)^T R(r, n-i)) / ((n-1) * r)
///
/// with D the first-order differences [x_{i+1}-x_i, ..., x_n-x_{n-1}, -x_n]
/// and R = [r^(n-i), ..., r, 1]. Reads exactly |tail| elements. `proj` maps
/// a range element to the vector it carries.
template <std::ranges::random_access_range Tail, class Proj = std::identity>
DecayedAverage decr_update(const DecayedAverage& avg, Tail&& tail, Proj proj = {},
                           WorkMeter* meter = nullptr) {
  const std::size_t len = std::ranges::size(tail);
  if (avg.count == 1) {
    throw Error(ErrorCode::SoleElement, "cannot delete the only element of a series");
  }
  if (avg.count == 0 || len == 0) {
    throw Error(ErrorCode::EmptySeries, "decremental update needs a non-empty series and tail");
  }
  if (len > avg.count) {
    throw Error(ErrorCode::IndexOutOfRange,
                "tail of " + std::to_string(len) + " exceeds series of " + std::to_string(avg.count));
  }
  auto it = std::ranges::begin(tail);
  SparseVector acc(avg.dimension());
  for (std::size_t t = 0; t < len; ++t) {
    const SparseVector& cur = std::invoke(proj, it[t]);
    if (cur.dimension() != avg.dimension()) {
      throw Error(ErrorCode::DimensionMismatch, "tail element dimension differs from the average");
    }
    const double weight = std::pow(avg.rate, static_cast<double>(len - 1 - t));
    if (t + 1 < len) {
      const SparseVector diff = std::invoke(proj, it[t + 1]) - cur;
      acc = combine(1.0, acc, weight, diff);
    } else {
      acc = combine(1.0, acc, -weight, cur);
    }
  }
  if (meter != nullptr) meter->touched += len;

  const double n = static_cast<double>(avg.count);
  DecayedAverage out{combine(n, avg.value, 1.0, acc), avg.count - 1, avg.rate};
  out.value.divide((n - 1.0) * avg.rate);
  return out;
}

}  // namespace tifu::decay
