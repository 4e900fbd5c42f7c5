#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tifu/decay.hpp"
#include "tifu/sparse_vector.hpp"

namespace tifu {

using UserId = std::int64_t;
using ItemId = std::int64_t;
using Seq = std::uint64_t;

/// One purchase event. `items` is kept sorted and free of duplicates.
struct Basket {
  UserId user = 0;
  Seq seq = 0;
  std::vector<ItemId> items;
  std::int64_t timestamp = 0;  // epoch milliseconds, metadata only

  static Basket make(UserId user, Seq seq, std::vector<ItemId> items, std::int64_t timestamp = 0);
  bool contains(ItemId item) const;
  bool operator==(const Basket&) const = default;
};

/// Bijection between item ids and dense indices [0, |I|). Indices follow
/// ascending item id, so two vocabularies over the same items agree.
class ItemVocabulary {
 public:
  ItemVocabulary() = default;
  explicit ItemVocabulary(std::vector<ItemId> items);

  std::size_t size() const noexcept { return items_.size(); }
  std::span<const ItemId> items() const noexcept { return items_; }

  std::optional<SparseVector::Index> find(ItemId item) const;
  SparseVector::Index index_of(ItemId item) const;  // throws UnknownItem
  ItemId item_at(SparseVector::Index index) const;

  bool operator==(const ItemVocabulary&) const = default;

 private:
  std::vector<ItemId> items_;
};

struct HyperParams {
  std::size_t group_size = 7;  // m
  double basket_decay = 0.9;   // r_b
  double group_decay = 0.7;    // r_g
  std::size_t neighbors = 300;
  double alpha = 0.7;

  void validate() const;

  // Tuned values used for the public datasets.
  static HyperParams tafeng() { return {7, 0.9, 0.7, 300, 0.7}; }
  static HyperParams instacart() { return {3, 0.9, 0.7, 900, 0.9}; }
  static HyperParams valued_shopper() { return {7, 1.0, 0.6, 300, 0.7}; }

  bool operator==(const HyperParams&) const = default;
};

struct Group {
  std::vector<Seq> baskets;       // ascending seq
  decay::DecayedAverage average;  // over the baskets' multi-hot vectors, rate r_b

  std::size_t size() const noexcept { return average.count; }
  const SparseVector& vector() const noexcept { return average.value; }
  bool operator==(const Group&) const = default;
};

/// Online model state of one user: group composition, group vectors and the
/// user vector (a decayed average over the group vectors, rate r_g).
struct UserState {
  UserId user = 0;
  std::vector<Group> groups;
  decay::DecayedAverage user_vector;
  std::size_t basket_count = 0;

  std::size_t group_count() const noexcept { return user_vector.count; }
  const SparseVector& vector() const noexcept { return user_vector.value; }
  std::optional<Seq> last_seq() const;
  std::vector<std::vector<Seq>> composition() const;

  bool operator==(const UserState&) const = default;
};

/// Retained baskets of one user, keyed by seq.
class History {
 public:
  History() = default;
  explicit History(std::span<const Basket> baskets);

  std::size_t size() const noexcept { return baskets_.size(); }
  bool empty() const noexcept { return baskets_.empty(); }
  const Basket* find(Seq seq) const;
  const Basket& at(Seq seq) const;  // throws MissingBasket
  std::optional<Seq> last_seq() const;

  void append(Basket basket);
  void erase(Seq seq);
  void erase_item(Seq seq, ItemId item);

  auto begin() const { return baskets_.begin(); }
  auto end() const { return baskets_.end(); }

  bool operator==(const History&) const = default;

 private:
  std::map<Seq, Basket> baskets_;
};

SparseVector multi_hot(const Basket& basket, const ItemVocabulary& vocab);

/// Batch model: consecutive groups of `group_size` baskets (the last group
/// holds the remainder), each group averaged with its own size as divisor.
UserState train_from_scratch(std::span<const Basket> history, const ItemVocabulary& vocab,
                             const HyperParams& params);

/// Batch model over a given group composition instead of fixed-size groups.
UserState recompute_from_groups(UserId user, std::span<const std::vector<Seq>> composition,
                                const History& history, const ItemVocabulary& vocab,
                                const HyperParams& params);

/// Fixed-size grouping of `n` baskets, as sizes.
std::vector<std::size_t> fixed_group_sizes(std::size_t n, std::size_t group_size);

}  // namespace tifu
