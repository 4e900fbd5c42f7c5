#include "tifu/store.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support/generators.hpp"
#include "tifu/engine.hpp"
#include "tifu/error.hpp"

using namespace tifu;

namespace {

HyperParams small_params() {
  HyperParams p;
  p.group_size = 3;
  return p;
}

std::string snapshot_bytes(const StateStore& store) {
  std::ostringstream out;
  store.write_snapshot(out);
  return out.str();
}

StateStore random_store(std::uint64_t seed, std::size_t users, std::size_t events) {
  std::mt19937_64 rng(seed);
  StateStore store(gen::vocab_1_to(12), small_params());
  Engine engine(store);
  VectorEventSource source(gen::random_events(rng, users, events, 12));
  engine.run(source, 1);
  return store;
}

}  // namespace

TEST(StateStore, ReadYourWrite) {
  StateStore store(ItemVocabulary({1, 2}), small_params());
  EXPECT_FALSE(store.get_state(1).has_value());

  std::optional<UserState> state;
  const auto basket = Basket::make(1, 1, {2});
  auto out = online::add_basket(state, basket, store.vocab(), store.params());
  store.put_state(1, state, out.delta);
  EXPECT_EQ(store.get_state(1), state);
  EXPECT_EQ(store.get_history(1)->size(), 1u);
  EXPECT_EQ(store.user_count(), 1u);

  auto second = online::add_basket(state, Basket::make(1, 2, {1}), store.vocab(), store.params());
  store.put_state(1, state, second.delta);
  EXPECT_EQ(store.get_history(1)->size(), 2u);

  auto removal = online::delete_basket(state, *store.get_history(1), 1, store.vocab(), store.params());
  store.put_state(1, state, removal.delta);
  EXPECT_EQ(store.get_history(1)->size(), 1u);
  EXPECT_EQ(store.get_state(1), state);

  store.remove_user(1);
  EXPECT_FALSE(store.get_state(1).has_value());
  EXPECT_FALSE(store.get_history(1).has_value());
  EXPECT_EQ(store.user_count(), 0u);
}

TEST(StateStore, RejectsDeltaForUnknownSeq) {
  StateStore store(ItemVocabulary({1}), small_params());
  std::optional<UserState> state;
  auto out = online::add_basket(state, Basket::make(7, 1, {1}), store.vocab(), store.params());
  store.put_state(7, state, out.delta);
  const std::string before = snapshot_bytes(store);
  try {
    store.put_state(7, state, online::EraseBasket{42});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConsistencyViolation);
  }
  try {
    store.put_state(7, state, online::AppendBasket{Basket::make(7, 2, {1})});
    FAIL() << "state does not reference the appended basket";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConsistencyViolation);
  }
  EXPECT_EQ(snapshot_bytes(store), before);
}

TEST(StateStore, IntegrityHoldsAfterRandomEvents) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const StateStore store = random_store(seed, 6, 300);
    EXPECT_NO_THROW(store.check_integrity());
    for (UserId u : store.users()) {
      const auto state = store.get_state(u);
      const auto history = store.get_history(u);
      ASSERT_TRUE(state && history);
      EXPECT_EQ(state->basket_count, history->size());
      for (const auto& g : state->composition()) {
        for (Seq s : g) EXPECT_NE(history->find(s), nullptr);
      }
    }
  }
}

TEST(Snapshot, EmptyRoundTrip) {
  StateStore store(ItemVocabulary({3, 1}), small_params());
  std::istringstream in(snapshot_bytes(store));
  const StateStore loaded = StateStore::read_snapshot(in);
  EXPECT_EQ(loaded.user_count(), 0u);
  EXPECT_EQ(loaded.vocab(), store.vocab());
  EXPECT_EQ(loaded.params(), store.params());
}

TEST(Snapshot, RandomRoundTripIsBitwise) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const StateStore store = random_store(seed, 8, 400);
    const std::string bytes = snapshot_bytes(store);
    std::istringstream in(bytes);
    const StateStore loaded = StateStore::read_snapshot(in);
    EXPECT_EQ(snapshot_bytes(loaded), bytes);
    ASSERT_EQ(loaded.users(), store.users());
    for (UserId u : store.users()) {
      EXPECT_EQ(loaded.get_state(u), store.get_state(u));
      EXPECT_EQ(loaded.get_history(u), store.get_history(u));
    }
  }
}

TEST(Snapshot, FileRoundTrip) {
  const StateStore store = random_store(3, 4, 100);
  const auto path = std::filesystem::temp_directory_path() / "tifu_store_test.snapshot";
  store.snapshot(path);
  const StateStore loaded = StateStore::load(path);
  EXPECT_EQ(snapshot_bytes(loaded), snapshot_bytes(store));
  std::filesystem::remove(path);
}

TEST(Snapshot, TruncatedOrDamagedInputIsCorrupt) {
  const std::string bytes = snapshot_bytes(random_store(1, 4, 100));
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, bytes.size() / 2, bytes.size() - 1}) {
    std::istringstream in(bytes.substr(0, cut));
    try {
      StateStore::read_snapshot(in);
      FAIL() << "cut at " << cut;
    } catch (const SnapshotCorrupt& e) {
      EXPECT_LE(e.offset(), bytes.size());
    }
  }
  std::string wrong_header = bytes;
  wrong_header[0] = 'X';
  std::istringstream in(wrong_header);
  EXPECT_THROW(StateStore::read_snapshot(in), SnapshotCorrupt);

  std::string trailing = bytes + "junk";
  std::istringstream in2(trailing);
  EXPECT_THROW(StateStore::read_snapshot(in2), SnapshotCorrupt);
}

TEST(Snapshot, MissingFile) {
  try {
    StateStore::load("/nonexistent/tifu.snapshot");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}
