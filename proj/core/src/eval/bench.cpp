#include "tifu/eval/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "tifu/error.hpp"
#include "tifu/online.hpp"

namespace tifu::eval {

namespace {

using Clock = std::chrono::steady_clock;

constexpr ItemId kItem = 1;
constexpr UserId kUser = 1;

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = (m + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid))) / 2.0;
  }
  return m;
}

struct SingleUser {
  ItemVocabulary vocab{std::vector<ItemId>{kItem}};
  std::optional<UserState> state;
  History history;
  Seq next_seq = 1;

  online::Outcome add(const HyperParams& params, std::int64_t* nanos = nullptr) {
    Basket b{kUser, next_seq++, {kItem}, 0};
    const auto start = Clock::now();
    online::Outcome out = online::add_basket(state, b, vocab, params);
    if (nanos) *nanos = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
    online::apply_delta(history, out.delta);
    return out;
  }

  online::Outcome remove(Seq seq, const HyperParams& params, std::int64_t* nanos = nullptr) {
    const auto start = Clock::now();
    online::Outcome out = online::delete_basket(state, history, seq, vocab, params);
    if (nanos) *nanos = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
    online::apply_delta(history, out.delta);
    return out;
  }
};

}  // namespace

double LatencyReport::mean_touch_count() const {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : samples) sum += static_cast<double>(s.touch_count);
  return sum / static_cast<double>(samples.size());
}

std::size_t LatencyReport::max_touch_count() const {
  std::size_t m = 0;
  for (const auto& s : samples) m = std::max(m, s.touch_count);
  return m;
}

double LatencyReport::median_nanos() const {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& s : samples) v.push_back(static_cast<double>(s.nanos));
  return median(std::move(v));
}

double LatencyReport::median_nanos_between(std::size_t lo, std::size_t hi) const {
  std::vector<double> v;
  for (const auto& s : samples) {
    if (s.history_size >= lo && s.history_size < hi) v.push_back(static_cast<double>(s.nanos));
  }
  return median(std::move(v));
}

HyperParams single_user_params() {
  HyperParams p;
  p.group_size = 2;
  p.basket_decay = 0.9;
  p.group_decay = 0.7;
  return p;
}

LatencyReport bench_incremental(std::span<const std::size_t> grid, std::size_t repetitions,
                                const HyperParams& params) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty history grid");
  params.validate();
  const std::size_t total = *std::max_element(grid.begin(), grid.end());
  const std::size_t reps = std::max<std::size_t>(repetitions, 1);

  std::vector<std::vector<double>> times(total, std::vector<double>(reps));
  std::vector<std::size_t> touches(total);
  for (std::size_t r = 0; r < reps; ++r) {
    SingleUser user;
    for (std::size_t i = 0; i < total; ++i) {
      std::int64_t nanos = 0;
      touches[i] = user.add(params, &nanos).touched;
      times[i][r] = static_cast<double>(nanos);
    }
  }
  LatencyReport report{"incremental", {}};
  report.samples.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    report.samples.push_back({i, static_cast<std::int64_t>(median(times[i])), touches[i]});
  }
  return report;
}

std::string_view to_string(DeletionOrder order) noexcept {
  switch (order) {
    case DeletionOrder::FromEnd: return "from_end";
    case DeletionOrder::FromStart: return "from_start";
    case DeletionOrder::Random: return "random";
  }
  return "unknown";
}

namespace {

std::vector<Seq> deletion_sequence(DeletionOrder order, std::size_t n, std::uint64_t seed) {
  std::vector<Seq> seqs(n);
  std::iota(seqs.begin(), seqs.end(), Seq{1});
  if (order == DeletionOrder::FromEnd) {
    std::reverse(seqs.begin(), seqs.end());
  } else if (order == DeletionOrder::Random) {
    std::mt19937_64 rng(seed);
    std::shuffle(seqs.begin(), seqs.end(), rng);
  }
  return seqs;
}

}  // namespace

LatencyReport bench_decremental(DeletionOrder order, std::size_t n, std::uint64_t seed, const HyperParams& params) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "decremental bench needs at least two baskets");
  params.validate();
  SingleUser user;
  for (std::size_t i = 0; i < n; ++i) user.add(params);

  LatencyReport report{std::string("decremental_") + std::string(to_string(order)), {}};
  report.samples.reserve(n);
  for (Seq seq : deletion_sequence(order, n, seed)) {
    const std::size_t before = user.history.size();
    std::int64_t nanos = 0;
    const online::Outcome out = user.remove(seq, params, &nanos);
    report.samples.push_back({before, nanos, out.touched});
  }
  return report;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "fit_line needs paired samples");
  LinearFit fit;
  fit.points = x.size();
  if (x.size() < 2) return fit;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

ErrorGrowthReport error_growth(std::size_t n_build, std::size_t n_deletions, DeletionOrder order,
                               std::uint64_t seed, const HyperParams& params) {
  if (n_deletions >= n_build) throw Error(ErrorCode::InvalidArgument, "need fewer deletions than baskets");
  params.validate();
  SingleUser user;
  for (std::size_t i = 0; i < n_build; ++i) user.add(params);

  auto relative_error = [&] {
    const auto composition = user.state->composition();
    const UserState exact = recompute_from_groups(kUser, composition, user.history, user.vocab, params);
    const double diff = std::sqrt((user.state->vector() - exact.vector()).squared_norm());
    return diff / std::sqrt(exact.vector().squared_norm());
  };

  ErrorGrowthReport report;
  report.relative_error.push_back(relative_error());
  const std::vector<Seq> seqs = deletion_sequence(order, n_build, seed);
  for (std::size_t step = 0; step < n_deletions; ++step) {
    user.remove(seqs[step], params);
    const double err = relative_error();
    report.relative_error.push_back(err);
    if (!report.first_step_over_one_percent && err >= 0.01) report.first_step_over_one_percent = step + 1;
  }

  std::vector<double> xs, ys;
  for (std::size_t s = 0; s < report.relative_error.size(); ++s) {
    if (report.relative_error[s] > report.fit_floor) {
      xs.push_back(static_cast<double>(s));
      ys.push_back(std::log(report.relative_error[s]));
    }
  }
  report.log_fit = fit_line(xs, ys);
  return report;
}

}  // namespace tifu::eval
