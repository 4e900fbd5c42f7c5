#include "tifu/model.hpp"

#include <algorithm>
#include <string>

#include "tifu/error.hpp"

namespace tifu {

Basket Basket::make(UserId user, Seq seq, std::vector<ItemId> items, std::int64_t timestamp) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  return Basket{user, seq, std::move(items), timestamp};
}

bool Basket::contains(ItemId item) const { return std::binary_search(items.begin(), items.end(), item); }

ItemVocabulary::ItemVocabulary(std::vector<ItemId> items) : items_(std::move(items)) {
  std::sort(items_.begin(), items_.end());
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

std::optional<SparseVector::Index> ItemVocabulary::find(ItemId item) const {
  auto it = std::lower_bound(items_.begin(), items_.end(), item);
  if (it == items_.end() || *it != item) return std::nullopt;
  return static_cast<SparseVector::Index>(it - items_.begin());
}

SparseVector::Index ItemVocabulary::index_of(ItemId item) const {
  if (auto index = find(item)) return *index;
  throw Error(ErrorCode::UnknownItem, "item " + std::to_string(item) + " is not in the vocabulary");
}

ItemId ItemVocabulary::item_at(SparseVector::Index index) const {
  if (index >= items_.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "item index " + std::to_string(index));
  }
  return items_[index];
}

void HyperParams::validate() const {
  if (group_size == 0) throw Error(ErrorCode::InvalidArgument, "group size must be positive");
  decay::check_rate(basket_decay);
  decay::check_rate(group_decay);
  if (neighbors == 0) throw Error(ErrorCode::InvalidArgument, "neighbor count must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
}

std::optional<Seq> UserState::last_seq() const {
  if (groups.empty() || groups.back().baskets.empty()) return std::nullopt;
  return groups.back().baskets.back();
}

std::vector<std::vector<Seq>> UserState::composition() const {
  std::vector<std::vector<Seq>> out;
  out.reserve(groups.size());
  for (const Group& g : groups) out.push_back(g.baskets);
  return out;
}

History::History(std::span<const Basket> baskets) {
  for (const Basket& b : baskets) append(b);
}

const Basket* History::find(Seq seq) const {
  auto it = baskets_.find(seq);
  return it == baskets_.end() ? nullptr : &it->second;
}

const Basket& History::at(Seq seq) const {
  if (const Basket* b = find(seq)) return *b;
  throw Error(ErrorCode::MissingBasket, "basket seq " + std::to_string(seq) + " not in history");
}

std::optional<Seq> History::last_seq() const {
  if (baskets_.empty()) return std::nullopt;
  return baskets_.rbegin()->first;
}

void History::append(Basket basket) {
  const Seq seq = basket.seq;
  if (!baskets_.emplace(seq, std::move(basket)).second) {
    throw Error(ErrorCode::ConsistencyViolation, "duplicate basket seq " + std::to_string(seq));
  }
}

void History::erase(Seq seq) {
  if (baskets_.erase(seq) == 0) {
    throw Error(ErrorCode::MissingBasket, "basket seq " + std::to_string(seq) + " not in history");
  }
}

void History::erase_item(Seq seq, ItemId item) {
  auto it = baskets_.find(seq);
  if (it == baskets_.end()) {
    throw Error(ErrorCode::MissingBasket, "basket seq " + std::to_string(seq) + " not in history");
  }
  auto& items = it->second.items;
  auto pos = std::lower_bound(items.begin(), items.end(), item);
  if (pos == items.end() || *pos != item) {
    throw Error(ErrorCode::ItemNotInBasket,
                "item " + std::to_string(item) + " not in basket " + std::to_string(seq));
  }
  items.erase(pos);
}

SparseVector multi_hot(const Basket& basket, const ItemVocabulary& vocab) {
  std::vector<SparseVector::Entry> entries;
  entries.reserve(basket.items.size());
  for (ItemId item : basket.items) entries.push_back({vocab.index_of(item), 1.0});
  return SparseVector::from_entries(vocab.size(), std::move(entries));
}

std::vector<std::size_t> fixed_group_sizes(std::size_t n, std::size_t group_size) {
  if (group_size == 0) throw Error(ErrorCode::InvalidArgument, "group size must be positive");
  std::vector<std::size_t> sizes(n / group_size, group_size);
  if (n % group_size != 0) sizes.push_back(n % group_size);
  return sizes;
}

namespace {

// Both batch entry points go through here so that a fixed-size composition
// reproduces train_from_scratch bit for bit.
UserState build(UserId user, std::span<const std::vector<const Basket*>> groups, std::size_t basket_count,
                const ItemVocabulary& vocab, const HyperParams& params) {
  UserState state;
  state.user = user;
  state.basket_count = basket_count;
  std::vector<SparseVector> group_vectors;
  group_vectors.reserve(groups.size());
  for (const auto& members : groups) {
    std::vector<SparseVector> baskets;
    Group group;
    baskets.reserve(members.size());
    for (const Basket* b : members) {
      baskets.push_back(multi_hot(*b, vocab));
      group.baskets.push_back(b->seq);
    }
    group.average = {decay::decayed_average(baskets, params.basket_decay), members.size(), params.basket_decay};
    group_vectors.push_back(group.average.value);
    state.groups.push_back(std::move(group));
  }
  state.user_vector = {decay::decayed_average(group_vectors, params.group_decay), groups.size(),
                       params.group_decay};
  return state;
}

}  // namespace

UserState train_from_scratch(std::span<const Basket> history, const ItemVocabulary& vocab,
                             const HyperParams& params) {
  params.validate();
  if (history.empty()) throw Error(ErrorCode::EmptyHistory, "cannot train on an empty history");
  std::vector<std::vector<const Basket*>> groups;
  std::size_t offset = 0;
  for (std::size_t size : fixed_group_sizes(history.size(), params.group_size)) {
    std::vector<const Basket*> members;
    for (std::size_t i = 0; i < size; ++i) members.push_back(&history[offset + i]);
    offset += size;
    groups.push_back(std::move(members));
  }
  return build(history.front().user, groups, history.size(), vocab, params);
}

UserState recompute_from_groups(UserId user, std::span<const std::vector<Seq>> composition,
                                const History& history, const ItemVocabulary& vocab,
                                const HyperParams& params) {
  params.validate();
  if (composition.empty()) throw Error(ErrorCode::EmptyHistory, "empty group composition");
  std::vector<std::vector<const Basket*>> groups;
  std::size_t count = 0;
  for (const auto& refs : composition) {
    if (refs.empty()) throw Error(ErrorCode::InvalidArgument, "empty group in composition");
    std::vector<const Basket*> members;
    for (Seq seq : refs) members.push_back(&history.at(seq));
    count += refs.size();
    groups.push_back(std::move(members));
  }
  return build(user, groups, count, vocab, params);
}

}  // namespace tifu
