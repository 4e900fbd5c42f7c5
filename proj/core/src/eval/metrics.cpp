#include "tifu/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace tifu::eval {

double recall_at(std::span<const ItemId> ranked, std::span<const ItemId> truth, std::size_t k) {
  if (truth.empty()) return 0.0;
  const std::size_t cut = std::min(k, ranked.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cut; ++i) hits += std::binary_search(truth.begin(), truth.end(), ranked[i]);
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double ndcg_at(std::span<const ItemId> ranked, std::span<const ItemId> truth, std::size_t k) {
  if (truth.empty() || k == 0) return 0.0;
  const std::size_t cut = std::min(k, ranked.size());
  double dcg = 0.0;
  for (std::size_t i = 0; i < cut; ++i) {
    if (std::binary_search(truth.begin(), truth.end(), ranked[i])) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  double ideal = 0.0;
  const std::size_t ideal_hits = std::min(truth.size(), k);
  for (std::size_t i = 0; i < ideal_hits; ++i) ideal += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / ideal;
}

}  // namespace tifu::eval
