#pragma once

#include <cstddef>
#include <span>

#include "tifu/model.hpp"

namespace tifu::eval {

/// |top-K ∩ truth| / |truth|. `truth` must be sorted.
double recall_at(std::span<const ItemId> ranked, std::span<const ItemId> truth, std::size_t k);

/// Binary-relevance NDCG@K: DCG = sum over hits of 1/log2(rank+1),
/// normalized by the ideal DCG of min(|truth|, K) hits. `truth` must be sorted.
double ndcg_at(std::span<const ItemId> ranked, std::span<const ItemId> truth, std::size_t k);

}  // namespace tifu::eval
