#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tifu/model.hpp"
#include "tifu/online.hpp"

namespace tifu {

/// User states plus the basket histories the deletion rules need, sharded by
/// user id. Every user with a state has a history and vice versa.
class StateStore {
 public:
  static constexpr std::size_t kDefaultShards = 64;

  StateStore(ItemVocabulary vocab, HyperParams params, std::size_t shards = kDefaultShards);

  StateStore(const StateStore&) = delete;
  StateStore& operator=(const StateStore&) = delete;
  StateStore(StateStore&&) noexcept = default;
  StateStore& operator=(StateStore&&) noexcept = default;

  const ItemVocabulary& vocab() const noexcept { return *vocab_; }
  const HyperParams& params() const noexcept { return params_; }

  std::optional<UserState> get_state(UserId user) const;
  std::optional<History> get_history(UserId user) const;

  /// Replaces the user's state and applies `delta` to the history in one
  /// step. Absent `state` removes the user, in which case the delta must
  /// erase the last basket. Rejects (ConsistencyViolation) any delta that
  /// does not match the history or the state's basket count.
  void put_state(UserId user, std::optional<UserState> state, const online::HistoryDelta& delta);

  void remove_user(UserId user);

  /// Runs `fn(std::optional<UserState>&, History&)` under the user's shard
  /// lock; the record is dropped afterwards if both are empty.
  template <class Fn>
  decltype(auto) with_user(UserId user, Fn&& fn);

  std::size_t user_count() const;
  std::vector<UserId> users() const;  // ascending

  /// Copies of all user vectors, ordered by user id.
  std::vector<std::pair<UserId, SparseVector>> user_vectors() const;

  /// Full O(|H|) audit: every basket ref resolves, counts agree, groups are
  /// ordered. Throws ConsistencyViolation.
  void check_integrity() const;

  void write_snapshot(std::ostream& out) const;
  void snapshot(const std::filesystem::path& path) const;
  static StateStore read_snapshot(std::istream& in);
  static StateStore load(const std::filesystem::path& path);

 private:
  struct Record {
    std::optional<UserState> state;
    History history;
  };
  struct Shard {
    mutable std::mutex mutex;
    std::unordered_map<UserId, Record> records;
  };

  Shard& shard_for(UserId user) const;
  template <class Fn>
  void for_each_sorted(Fn&& fn) const;

  std::shared_ptr<const ItemVocabulary> vocab_;
  HyperParams params_;
  std::unique_ptr<Shard[]> shards_;
  std::size_t shard_count_;
};

std::size_t user_hash(UserId user) noexcept;

template <class Fn>
decltype(auto) StateStore::with_user(UserId user, Fn&& fn) {
  Shard& shard = shard_for(user);
  std::lock_guard lock(shard.mutex);
  auto [it, inserted] = shard.records.try_emplace(user);
  struct Cleanup {
    std::unordered_map<UserId, Record>& records;
    std::unordered_map<UserId, Record>::iterator it;
    ~Cleanup() {
      if (!it->second.state && it->second.history.empty()) records.erase(it);
    }
  } cleanup{shard.records, it};
  return fn(it->second.state, it->second.history);
}

}  // namespace tifu
