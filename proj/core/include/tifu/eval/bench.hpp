#pragma once

// Single-user experiments over a one-item vocabulary, so every basket is
// {1} and only the history length varies.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tifu/model.hpp"

namespace tifu::eval {

struct LatencySample {
  std::size_t history_size = 0;  // before the update
  std::int64_t nanos = 0;
  std::size_t touch_count = 0;
};

struct LatencyReport {
  std::string experiment;
  std::vector<LatencySample> samples;

  double mean_touch_count() const;
  std::size_t max_touch_count() const;
  double median_nanos() const;
  /// Median nanos over samples whose history_size lies in [lo, hi).
  double median_nanos_between(std::size_t lo, std::size_t hi) const;
};

/// Parameters used by the single-user experiments unless told otherwise.
HyperParams single_user_params();

/// Adds baskets one at a time up to the largest grid value and records each
/// addition; with several repetitions every sample holds the median over
/// repetitions for that addition.
LatencyReport bench_incremental(std::span<const std::size_t> grid, std::size_t repetitions,
                                const HyperParams& params = single_user_params());

enum class DeletionOrder { FromEnd, FromStart, Random };
std::string_view to_string(DeletionOrder order) noexcept;

/// Builds `n` baskets and deletes all of them in the given order.
LatencyReport bench_decremental(DeletionOrder order, std::size_t n, std::uint64_t seed,
                                const HyperParams& params = single_user_params());

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct ErrorGrowthReport {
  /// relative_error[s] after s deletions; [0] is right after the build.
  std::vector<double> relative_error;
  /// Least-squares fit of ln(error) against step over steps with error above
  /// `fit_floor`.
  LinearFit log_fit;
  double fit_floor = 1e-14;
  std::optional<std::size_t> first_step_over_one_percent;
};

/// Builds the user vector by additions, then deletes repeatedly, comparing
/// the online vector against a recomputation over the surviving composition
/// after every deletion.
ErrorGrowthReport error_growth(std::size_t n_build, std::size_t n_deletions,
                               DeletionOrder order = DeletionOrder::FromEnd, std::uint64_t seed = 0,
                               const HyperParams& params = single_user_params());

}  // namespace tifu::eval
