#include "tifu/online.hpp"

#include <algorithm>
#include <string>

#include "tifu/error.hpp"

namespace tifu::online {

namespace {

struct Location {
  std::size_t group;     // 0-based index among current groups
  std::size_t position;  // 0-based index inside the group
};

// Groups are ordered and each group's seqs ascend, so the enclosing group is
// found by binary search on the groups' last seq.
Location locate(const UserState& state, Seq seq) {
  auto git = std::lower_bound(state.groups.begin(), state.groups.end(), seq,
                              [](const Group& g, Seq s) { return g.baskets.back() < s; });
  if (git != state.groups.end()) {
    auto bit = std::lower_bound(git->baskets.begin(), git->baskets.end(), seq);
    if (bit != git->baskets.end() && *bit == seq) {
      return {static_cast<std::size_t>(git - state.groups.begin()),
              static_cast<std::size_t>(bit - git->baskets.begin())};
    }
  }
  throw Error(ErrorCode::MissingBasket, "basket seq " + std::to_string(seq) + " not in user state");
}

void check_user(const UserState& state, UserId user) {
  if (state.user != user) {
    throw Error(ErrorCode::InvalidArgument,
                "event for user " + std::to_string(user) + " applied to state of user " + std::to_string(state.user));
  }
}

}  // namespace

void apply_delta(History& history, const HistoryDelta& delta) {
  std::visit(
      [&history](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, AppendBasket>) {
          history.append(d.basket);
        } else if constexpr (std::is_same_v<T, EraseBasket>) {
          history.erase(d.seq);
        } else {
          history.erase_item(d.seq, d.item);
        }
      },
      delta);
}

Outcome add_basket(std::optional<UserState>& state, const Basket& basket, const ItemVocabulary& vocab,
                   const HyperParams& params) {
  if (basket.items.empty()) throw Error(ErrorCode::InvalidArgument, "basket has no items");
  const SparseVector x = multi_hot(basket, vocab);

  if (!state) {
    UserState fresh;
    fresh.user = basket.user;
    fresh.groups.push_back(
        Group{{basket.seq}, decay::incr_update(decay::DecayedAverage::empty(vocab.size(), params.basket_decay), x)});
    fresh.user_vector = decay::incr_update(decay::DecayedAverage::empty(vocab.size(), params.group_decay), x);
    fresh.basket_count = 1;
    state = std::move(fresh);
    return {Scenario::NewGroup, AppendBasket{basket}, 1};
  }

  UserState& s = *state;
  check_user(s, basket.user);
  if (auto last = s.last_seq(); last && basket.seq <= *last) {
    throw Error(ErrorCode::OutOfOrderBasket,
                "basket seq " + std::to_string(basket.seq) + " not after " + std::to_string(*last));
  }

  Group& last_group = s.groups.back();
  if (last_group.size() >= params.group_size) {
    // A new single-basket group: its vector is the basket vector itself.
    decay::DecayedAverage user = decay::incr_update(s.user_vector, x);
    Group group{{basket.seq}, decay::incr_update(decay::DecayedAverage::empty(vocab.size(), params.basket_decay), x)};
    s.groups.push_back(std::move(group));
    s.user_vector = std::move(user);
    ++s.basket_count;
    return {Scenario::NewGroup, AppendBasket{basket}, 1};
  }

  decay::DecayedAverage group = decay::incr_update(last_group.average, x);
  decay::DecayedAverage user = decay::inplace_update(s.user_vector, 0, last_group.average.value, group.value);
  last_group.baskets.push_back(basket.seq);
  last_group.average = std::move(group);
  s.user_vector = std::move(user);
  ++s.basket_count;
  return {Scenario::ExtendGroup, AppendBasket{basket}, 1};
}

Outcome delete_basket(std::optional<UserState>& state, const History& history, Seq seq,
                      const ItemVocabulary& vocab, const HyperParams& /*params*/) {
  if (!state) throw Error(ErrorCode::MissingBasket, "no state for basket seq " + std::to_string(seq));
  UserState& s = *state;
  const Location loc = locate(s, seq);
  history.at(seq);

  Group& group = s.groups[loc.group];
  const std::size_t k = s.groups.size();

  if (group.size() > 1) {
    std::vector<SparseVector> tail;
    tail.reserve(group.baskets.size() - loc.position);
    for (std::size_t p = loc.position; p < group.baskets.size(); ++p) {
      tail.push_back(multi_hot(history.at(group.baskets[p]), vocab));
    }
    decay::WorkMeter meter;
    decay::DecayedAverage shrunk = decay::decr_update(group.average, tail, std::identity{}, &meter);
    decay::DecayedAverage user =
        decay::inplace_update(s.user_vector, k - 1 - loc.group, group.average.value, shrunk.value);

    group.baskets.erase(group.baskets.begin() + static_cast<std::ptrdiff_t>(loc.position));
    group.average = std::move(shrunk);
    s.user_vector = std::move(user);
    --s.basket_count;
    return {Scenario::ShrinkGroup, EraseBasket{seq}, meter.touched};
  }

  if (k == 1) {
    state.reset();
    return {Scenario::RemoveUser, EraseBasket{seq}, 1};
  }

  decay::WorkMeter meter;
  const auto slice = std::span<const Group>(s.groups).subspan(loc.group);
  decay::DecayedAverage user =
      decay::decr_update(s.user_vector, slice, [](const Group& g) -> const SparseVector& { return g.vector(); }, &meter);
  s.groups.erase(s.groups.begin() + static_cast<std::ptrdiff_t>(loc.group));
  s.user_vector = std::move(user);
  --s.basket_count;
  return {Scenario::VanishGroup, EraseBasket{seq}, meter.touched};
}

Outcome delete_item(std::optional<UserState>& state, const History& history, Seq seq, ItemId item,
                    const ItemVocabulary& vocab, const HyperParams& params) {
  if (!state) throw Error(ErrorCode::MissingBasket, "no state for basket seq " + std::to_string(seq));
  const Location loc = locate(*state, seq);
  const Basket& basket = history.at(seq);
  if (!basket.contains(item)) {
    throw Error(ErrorCode::ItemNotInBasket,
                "item " + std::to_string(item) + " not in basket " + std::to_string(seq));
  }
  if (basket.items.size() == 1) {
    return delete_basket(state, history, seq, vocab, params);
  }

  UserState& s = *state;
  Group& group = s.groups[loc.group];
  Basket edited = basket;
  edited.items.erase(std::lower_bound(edited.items.begin(), edited.items.end(), item));
  const SparseVector before = multi_hot(basket, vocab);
  const SparseVector after = multi_hot(edited, vocab);

  decay::DecayedAverage updated =
      decay::inplace_update(group.average, group.size() - 1 - loc.position, before, after);
  decay::DecayedAverage user =
      decay::inplace_update(s.user_vector, s.groups.size() - 1 - loc.group, group.average.value, updated.value);
  group.average = std::move(updated);
  s.user_vector = std::move(user);
  return {Scenario::EditBasket, EraseItem{seq, item}, 1};
}

Outcome apply(std::optional<UserState>& state, const History& history, const DeletionRequest& request,
              const ItemVocabulary& vocab, const HyperParams& params) {
  if (state) check_user(*state, request.user);
  return std::visit(
      [&](const auto& target) {
        using T = std::decay_t<decltype(target)>;
        if constexpr (std::is_same_v<T, DeleteBasket>) {
          return delete_basket(state, history, target.seq, vocab, params);
        } else {
          return delete_item(state, history, target.seq, target.item, vocab, params);
        }
      },
      request.target);
}

}  // namespace tifu::online
