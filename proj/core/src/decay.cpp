#include "tifu/decay.hpp"

#include <string>

namespace tifu::decay {

namespace {

void check_dimension(const DecayedAverage& avg, const SparseVector& x) {
  if (x.dimension() != avg.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "vector of dimension " + std::to_string(x.dimension()) +
                                                  " against average of dimension " +
                                                  std::to_string(avg.dimension()));
  }
}

}  // namespace

void check_rate(double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "decay rate must lie in (0, 1], got " + std::to_string(rate));
  }
}

DecayedAverage DecayedAverage::empty(std::size_t dimension, double rate) {
  check_rate(rate);
  return DecayedAverage{SparseVector(dimension), 0, rate};
}

SparseVector decayed_average(std::span<const SparseVector> series, double rate) {
  check_rate(rate);
  if (series.empty()) throw Error(ErrorCode::EmptySeries, "decayed average of an empty series");
  const std::size_t n = series.size();
  SparseVector sum(series.front().dimension());
  for (std::size_t i = 0; i < n; ++i) {
    sum = combine(1.0, sum, std::pow(rate, static_cast<double>(n - 1 - i)), series[i]);
  }
  sum.divide(static_cast<double>(n));
  return sum;
}

DecayedAverage incr_update(const DecayedAverage& avg, const SparseVector& x_new) {
  check_dimension(avg, x_new);
  const double n = static_cast<double>(avg.count);
  DecayedAverage out{combine(avg.rate * n, avg.value, 1.0, x_new), avg.count + 1, avg.rate};
  out.value.divide(n + 1.0);
  return out;
}

DecayedAverage inplace_update(const DecayedAverage& avg, std::size_t position_from_end,
                              const SparseVector& x_old, const SparseVector& x_new) {
  check_dimension(avg, x_old);
  check_dimension(avg, x_new);
  if (position_from_end >= avg.count) {
    throw Error(ErrorCode::IndexOutOfRange, "position " + std::to_string(position_from_end) +
                                                " from end in a series of " + std::to_string(avg.count));
  }
  const double n = static_cast<double>(avg.count);
  const double weight = std::pow(avg.rate, static_cast<double>(position_from_end));
  DecayedAverage out{combine(n, avg.value, weight, x_new - x_old), avg.count, avg.rate};
  out.value.divide(n);
  return out;
}

}  // namespace tifu::decay
