#pragma once

// Online maintenance of a UserState under basket additions, basket
// deletions and item deletions.
//
// Additions append to the last group while it has fewer than m baskets and
// open a new single-basket group otherwise; both cases cost O(|basket|)
// regardless of history length. Deletions use varying group sizes: only the
// enclosing group is rewritten (from the deleted basket to the group's end),
// and a group that loses its last basket vanishes, in which case the user
// vector is corrected from the vanished group to the last group.
//
// Each operation either completes or throws a tifu::Error leaving `state`
// unchanged. The state is updated in place so additions never copy the
// group list; the history is only read, and the returned delta tells the
// caller how to bring its history store in line.

#include <cstddef>
#include <optional>
#include <variant>

#include "tifu/model.hpp"

namespace tifu::online {

struct DeleteBasket {
  Seq seq = 0;
  bool operator==(const DeleteBasket&) const = default;
};

struct DeleteItem {
  Seq seq = 0;
  ItemId item = 0;
  bool operator==(const DeleteItem&) const = default;
};

struct DeletionRequest {
  UserId user = 0;
  std::variant<DeleteBasket, DeleteItem> target;
  bool operator==(const DeletionRequest&) const = default;
};

struct AppendBasket {
  Basket basket;
};
struct EraseBasket {
  Seq seq = 0;
};
struct EraseItem {
  Seq seq = 0;
  ItemId item = 0;
};
using HistoryDelta = std::variant<AppendBasket, EraseBasket, EraseItem>;

void apply_delta(History& history, const HistoryDelta& delta);

enum class Scenario {
  NewGroup,          // add: last group full (or no state yet)
  ExtendGroup,       // add: last group has room
  ShrinkGroup,       // delete basket from a group holding more than one
  VanishGroup,       // delete the only basket of a group
  EditBasket,        // delete one item, basket keeps other items
  RemoveUser,        // the user's last basket is gone
};

struct Outcome {
  Scenario scenario;
  HistoryDelta delta;
  /// Number of stored series elements (basket or group vectors) the update
  /// read: 1 for an addition or item edit, the basket slice length for a
  /// group shrink, the group slice length for a vanished group.
  std::size_t touched = 0;

  bool removed() const noexcept { return scenario == Scenario::RemoveUser; }
};

Outcome add_basket(std::optional<UserState>& state, const Basket& basket, const ItemVocabulary& vocab,
                   const HyperParams& params);

Outcome delete_basket(std::optional<UserState>& state, const History& history, Seq seq,
                      const ItemVocabulary& vocab, const HyperParams& params);

Outcome delete_item(std::optional<UserState>& state, const History& history, Seq seq, ItemId item,
                    const ItemVocabulary& vocab, const HyperParams& params);

Outcome apply(std::optional<UserState>& state, const History& history, const DeletionRequest& request,
              const ItemVocabulary& vocab, const HyperParams& params);

}  // namespace tifu::online
