#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tifu/eval/dataset.hpp"
#include "tifu/model.hpp"
#include "tifu/recommend.hpp"

namespace tifu::eval {

enum class EvalMode {
  Baseline,      // batch training on all but the last basket
  Incremental,   // the same baskets streamed through the online additions
  Decremental,   // incremental, then deletions for a sampled set of users
};

struct EvalOptions {
  HyperParams params;
  EvalMode mode = EvalMode::Baseline;
  std::uint64_t seed = 42;
  std::vector<std::size_t> cutoffs{10, 20};
  double deletion_user_rate = 1.0 / 1000.0;
  double deletion_basket_fraction = 0.1;
  unsigned workers = 1;
  DistanceMetric metric = DistanceMetric::Euclidean;
  bool keep_per_user = false;
};

struct UserMetrics {
  UserId user = 0;
  std::vector<double> recall;  // per cutoff
  std::vector<double> ndcg;
};

struct MetricsReport {
  std::vector<std::size_t> cutoffs;
  std::vector<double> recall;  // averaged, per cutoff
  std::vector<double> ndcg;
  std::size_t users_evaluated = 0;
  std::size_t users_excluded = 0;  // fewer than two baskets
  std::size_t users_with_deletions = 0;
  std::size_t baskets_deleted = 0;
  std::vector<UserId> deletion_users;
  std::vector<UserMetrics> per_user;  // filled when keep_per_user
};

/// Leave-last-out evaluation: each user's last basket is the truth, the
/// rest trains the model in the chosen mode.
MetricsReport evaluate(const Dataset& dataset, const EvalOptions& options);

}  // namespace tifu::eval
