#include "tifu/store.hpp"

#include <algorithm>
#include <string>

#include "tifu/error.hpp"

namespace tifu {

std::size_t user_hash(UserId user) noexcept {
  // splitmix64 finalizer
  auto z = static_cast<std::uint64_t>(user) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return static_cast<std::size_t>(z ^ (z >> 31));
}

StateStore::StateStore(ItemVocabulary vocab, HyperParams params, std::size_t shards)
    : vocab_(std::make_shared<const ItemVocabulary>(std::move(vocab))),
      params_(params),
      shards_(std::make_unique<Shard[]>(std::max<std::size_t>(shards, 1))),
      shard_count_(std::max<std::size_t>(shards, 1)) {
  params_.validate();
}

StateStore::Shard& StateStore::shard_for(UserId user) const { return shards_[user_hash(user) % shard_count_]; }

std::optional<UserState> StateStore::get_state(UserId user) const {
  Shard& shard = shard_for(user);
  std::lock_guard lock(shard.mutex);
  auto it = shard.records.find(user);
  if (it == shard.records.end()) return std::nullopt;
  return it->second.state;
}

std::optional<History> StateStore::get_history(UserId user) const {
  Shard& shard = shard_for(user);
  std::lock_guard lock(shard.mutex);
  auto it = shard.records.find(user);
  if (it == shard.records.end()) return std::nullopt;
  return it->second.history;
}

namespace {

[[noreturn]] void violation(const std::string& what) { throw Error(ErrorCode::ConsistencyViolation, what); }

void check_delta(UserId user, const std::optional<UserState>& state, const History& history,
                 const online::HistoryDelta& delta) {
  if (state && state->user != user) violation("state belongs to user " + std::to_string(state->user));
  const std::size_t after = std::visit(
      [&](const auto& d) -> std::size_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, online::AppendBasket>) {
          if (d.basket.user != user) violation("appended basket belongs to another user");
          if (history.find(d.basket.seq) != nullptr) violation("seq " + std::to_string(d.basket.seq) + " already stored");
          if (auto last = history.last_seq(); last && d.basket.seq <= *last) violation("appended seq is not the newest");
          if (!state || state->last_seq() != d.basket.seq) violation("state does not end with the appended basket");
          return history.size() + 1;
        } else if constexpr (std::is_same_v<T, online::EraseBasket>) {
          if (history.find(d.seq) == nullptr) violation("delta erases unknown seq " + std::to_string(d.seq));
          return history.size() - 1;
        } else {
          const Basket* b = history.find(d.seq);
          if (b == nullptr) violation("delta edits unknown seq " + std::to_string(d.seq));
          if (!b->contains(d.item) || b->items.size() < 2) violation("delta removes an item the basket cannot lose");
          return history.size();
        }
      },
      delta);
  const std::size_t claimed = state ? state->basket_count : 0;
  if (claimed != after) {
    violation("state holds " + std::to_string(claimed) + " baskets, history would hold " + std::to_string(after));
  }
}

}  // namespace

void StateStore::put_state(UserId user, std::optional<UserState> state, const online::HistoryDelta& delta) {
  with_user(user, [&](std::optional<UserState>& current, History& history) {
    check_delta(user, state, history, delta);
    online::apply_delta(history, delta);
    current = std::move(state);
  });
}

void StateStore::remove_user(UserId user) {
  Shard& shard = shard_for(user);
  std::lock_guard lock(shard.mutex);
  shard.records.erase(user);
}

std::size_t StateStore::user_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < shard_count_; ++i) {
    std::lock_guard lock(shards_[i].mutex);
    n += shards_[i].records.size();
  }
  return n;
}

std::vector<UserId> StateStore::users() const {
  std::vector<UserId> out;
  for (std::size_t i = 0; i < shard_count_; ++i) {
    std::lock_guard lock(shards_[i].mutex);
    for (const auto& [id, rec] : shards_[i].records) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<UserId, SparseVector>> StateStore::user_vectors() const {
  std::vector<std::pair<UserId, SparseVector>> out;
  for (std::size_t i = 0; i < shard_count_; ++i) {
    std::lock_guard lock(shards_[i].mutex);
    for (const auto& [id, rec] : shards_[i].records) {
      if (rec.state) out.emplace_back(id, rec.state->vector());
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

void StateStore::check_integrity() const {
  for (std::size_t i = 0; i < shard_count_; ++i) {
    std::lock_guard lock(shards_[i].mutex);
    for (const auto& [id, rec] : shards_[i].records) {
      const std::string who = "user " + std::to_string(id) + ": ";
      if (!rec.state) violation(who + "history without state");
      const UserState& s = *rec.state;
      if (s.user != id) violation(who + "state carries user " + std::to_string(s.user));
      if (s.groups.size() != s.group_count()) violation(who + "group count disagrees with user vector count");
      std::size_t total = 0;
      std::optional<Seq> previous;
      for (const Group& g : s.groups) {
        if (g.baskets.empty() || g.baskets.size() != g.size()) violation(who + "group size disagrees with refs");
        if (g.size() > params_.group_size) violation(who + "group larger than the group size");
        for (Seq seq : g.baskets) {
          if (previous && seq <= *previous) violation(who + "basket refs out of order");
          if (rec.history.find(seq) == nullptr) violation(who + "dangling basket ref " + std::to_string(seq));
          previous = seq;
        }
        total += g.size();
      }
      if (total != s.basket_count || total != rec.history.size()) {
        violation(who + "basket count " + std::to_string(s.basket_count) + ", refs " + std::to_string(total) +
                  ", history " + std::to_string(rec.history.size()));
      }
    }
  }
}

}  // namespace tifu
