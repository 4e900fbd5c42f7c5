#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "tifu/model.hpp"
#include "tifu/sparse_vector.hpp"
#include "tifu/store.hpp"

namespace tifu {

enum class DistanceMetric { Euclidean, Cosine };

struct Prediction {
  UserId user = 0;
  SparseVector scores;
  std::vector<ItemId> top_items;
};

/// Exact nearest-neighbor search over a fixed set of user vectors. Queries
/// only visit users sharing an item with the query through an inverted
/// index; all other distances follow from the stored norms.
class NeighborIndex {
 public:
  NeighborIndex(std::vector<std::pair<UserId, SparseVector>> users, DistanceMetric metric = DistanceMetric::Euclidean);
  static NeighborIndex from_store(const StateStore& store, DistanceMetric metric = DistanceMetric::Euclidean);

  std::size_t size() const noexcept { return users_.size(); }
  const SparseVector* vector_of(UserId user) const;

  /// The `k` closest users to `query` (ties by ascending user id), skipping
  /// `exclude`.
  std::vector<UserId> nearest(const SparseVector& query, std::size_t k,
                              std::optional<UserId> exclude = std::nullopt) const;
  std::vector<UserId> nearest(UserId target, std::size_t k) const;  // throws UnknownUser

 private:
  struct Posting {
    std::size_t user;
    double value;
  };

  std::vector<std::pair<UserId, SparseVector>> users_;  // ascending id
  std::vector<double> squared_norms_;
  std::vector<std::vector<Posting>> postings_;  // by item index
  DistanceMetric metric_;
};

std::vector<UserId> nearest_neighbors(UserId target, std::size_t k, const StateStore& store,
                                      DistanceMetric metric = DistanceMetric::Euclidean);

/// p = alpha * target + (1 - alpha) * mean(neighbors), ranked to `n` items.
Prediction predict(UserId target, const HyperParams& params, const NeighborIndex& index,
                   const ItemVocabulary& vocab, std::size_t n);
Prediction predict(UserId target, const HyperParams& params, const StateStore& store, std::size_t n);

/// Item indices ordered by score descending, ties by ascending index; items
/// without a stored score count as zero.
std::vector<SparseVector::Index> top_n(const SparseVector& scores, std::size_t n);

}  // namespace tifu
