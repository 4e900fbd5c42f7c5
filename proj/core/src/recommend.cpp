#include "tifu/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tifu/error.hpp"

namespace tifu {

NeighborIndex::NeighborIndex(std::vector<std::pair<UserId, SparseVector>> users, DistanceMetric metric)
    : users_(std::move(users)), metric_(metric) {
  std::sort(users_.begin(), users_.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t dimension = 0;
  for (const auto& [id, v] : users_) dimension = std::max(dimension, v.dimension());
  postings_.resize(dimension);
  squared_norms_.reserve(users_.size());
  for (std::size_t u = 0; u < users_.size(); ++u) {
    const SparseVector& v = users_[u].second;
    squared_norms_.push_back(v.squared_norm());
    for (const auto& e : v.entries()) postings_[e.index].push_back({u, e.value});
  }
}

NeighborIndex NeighborIndex::from_store(const StateStore& store, DistanceMetric metric) {
  return NeighborIndex(store.user_vectors(), metric);
}

const SparseVector* NeighborIndex::vector_of(UserId user) const {
  auto it = std::lower_bound(users_.begin(), users_.end(), user,
                             [](const auto& entry, UserId id) { return entry.first < id; });
  return (it != users_.end() && it->first == user) ? &it->second : nullptr;
}

std::vector<UserId> NeighborIndex::nearest(const SparseVector& query, std::size_t k,
                                           std::optional<UserId> exclude) const {
  // Dot products accumulate in the query's index order, the same order its
  // squared norm uses, so a user identical to the query lands at exactly 0.
  std::vector<double> dots(users_.size(), 0.0);
  double query_norm = 0.0;
  for (const auto& e : query.entries()) {
    query_norm += e.value * e.value;
    if (e.index >= postings_.size()) continue;
    for (const Posting& p : postings_[e.index]) dots[p.user] += e.value * p.value;
  }

  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(users_.size());
  for (std::size_t u = 0; u < users_.size(); ++u) {
    if (exclude && users_[u].first == *exclude) continue;
    double distance;
    if (metric_ == DistanceMetric::Euclidean) {
      distance = std::max(0.0, query_norm + squared_norms_[u] - 2.0 * dots[u]);
    } else {
      const double denom = std::sqrt(query_norm * squared_norms_[u]);
      distance = denom > 0.0 ? 1.0 - dots[u] / denom : 1.0;
    }
    ranked.emplace_back(distance, u);
  }
  const std::size_t take = std::min(k, ranked.size());
  // Index order equals user id order, so pair comparison breaks ties by id.
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end());
  std::vector<UserId> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(users_[ranked[i].second].first);
  return out;
}

std::vector<UserId> NeighborIndex::nearest(UserId target, std::size_t k) const {
  const SparseVector* v = vector_of(target);
  if (v == nullptr) throw Error(ErrorCode::UnknownUser, "user " + std::to_string(target) + " has no state");
  return nearest(*v, k, target);
}

std::vector<UserId> nearest_neighbors(UserId target, std::size_t k, const StateStore& store, DistanceMetric metric) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "neighbor count must be positive");
  return NeighborIndex::from_store(store, metric).nearest(target, k);
}

std::vector<SparseVector::Index> top_n(const SparseVector& scores, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "top_n needs n >= 1");
  std::vector<SparseVector::Entry> positive;
  std::vector<SparseVector::Entry> negative;
  for (const auto& e : scores.entries()) (e.value > 0.0 ? positive : negative).push_back(e);
  auto by_score = [](const SparseVector::Entry& a, const SparseVector::Entry& b) {
    return a.value != b.value ? a.value > b.value : a.index < b.index;
  };

  std::vector<SparseVector::Index> out;
  const std::size_t limit = std::min(n, scores.dimension());
  out.reserve(limit);
  const std::size_t take = std::min(limit, positive.size());
  std::partial_sort(positive.begin(), positive.begin() + static_cast<std::ptrdiff_t>(take), positive.end(), by_score);
  for (std::size_t i = 0; i < take; ++i) out.push_back(positive[i].index);

  // Zero scores next, by index; stored entries are never zero.
  auto stored = scores.entries();
  std::size_t s = 0;
  for (SparseVector::Index idx = 0; out.size() < limit && idx < scores.dimension(); ++idx) {
    while (s < stored.size() && stored[s].index < idx) ++s;
    if (s < stored.size() && stored[s].index == idx) continue;
    out.push_back(idx);
  }

  std::sort(negative.begin(), negative.end(), by_score);
  for (std::size_t i = 0; out.size() < limit && i < negative.size(); ++i) out.push_back(negative[i].index);
  return out;
}

Prediction predict(UserId target, const HyperParams& params, const NeighborIndex& index,
                   const ItemVocabulary& vocab, std::size_t n) {
  const SparseVector* own = index.vector_of(target);
  if (own == nullptr) throw Error(ErrorCode::UnknownUser, "user " + std::to_string(target) + " has no state");

  Prediction prediction;
  prediction.user = target;
  if (params.alpha == 1.0) {
    prediction.scores = *own;
  } else {
    const std::vector<UserId> neighbors = index.nearest(*own, params.neighbors, target);
    if (neighbors.empty()) {
      throw Error(ErrorCode::NeighborlessUser, "user " + std::to_string(target) + " has no neighbors");
    }
    // Dense scratch accumulation; per entry the sum runs in neighbor order.
    std::vector<double> sum(own->dimension(), 0.0);
    std::vector<SparseVector::Index> touched;
    for (UserId id : neighbors) {
      for (const auto& e : index.vector_of(id)->entries()) {
        if (sum[e.index] == 0.0) touched.push_back(e.index);
        sum[e.index] += e.value;
      }
    }
    std::vector<SparseVector::Entry> entries;
    entries.reserve(touched.size());
    for (SparseVector::Index idx : touched) {
      if (sum[idx] != 0.0) entries.push_back({idx, sum[idx]});
      sum[idx] = 0.0;
    }
    SparseVector mean = SparseVector::from_entries(own->dimension(), std::move(entries));
    mean.divide(static_cast<double>(neighbors.size()));
    prediction.scores = combine(params.alpha, *own, 1.0 - params.alpha, mean);
  }
  for (SparseVector::Index idx : top_n(prediction.scores, n)) prediction.top_items.push_back(vocab.item_at(idx));
  return prediction;
}

Prediction predict(UserId target, const HyperParams& params, const StateStore& store, std::size_t n) {
  return predict(target, params, NeighborIndex::from_store(store), store.vocab(), n);
}

}  // namespace tifu
