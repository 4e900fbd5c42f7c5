#include "tifu/recommend.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/generators.hpp"
#include "tifu/error.hpp"

using namespace tifu;

namespace {

SparseVector dense(std::vector<double> v) { return SparseVector::from_dense(v); }

HyperParams with_alpha(double alpha, std::size_t k = 300) {
  HyperParams p;
  p.alpha = alpha;
  p.neighbors = k;
  return p;
}

}  // namespace

TEST(NearestNeighbors, ClampsToAvailableUsers) {
  const NeighborIndex index({{1, dense({1, 0})}, {2, dense({0, 1})}});
  EXPECT_EQ(index.nearest(1, 5), std::vector<UserId>{2});
}

TEST(NearestNeighbors, IdenticalUserFirst) {
  const NeighborIndex index({{1, dense({0.3, 0.6})}, {2, dense({1, 1})}, {3, dense({0.3, 0.6})}, {4, dense({0, 0})}});
  EXPECT_EQ(index.nearest(1, 1), std::vector<UserId>{3});
}

TEST(NearestNeighbors, WorkedExample) {
  const NeighborIndex index({{1, dense({1, 0})}, {2, dense({0, 1})}, {3, dense({0.9, 0.1})}, {4, dense({1, 0})}});
  // Query user 4 = [1,0]; user 1 is at distance 0, so drop it from the pool.
  const NeighborIndex three({{2, dense({0, 1})}, {3, dense({0.9, 0.1})}, {4, dense({1, 0})}});
  EXPECT_EQ(three.nearest(4, 1), std::vector<UserId>{3});
  EXPECT_EQ(index.nearest(4, 3), (std::vector<UserId>{1, 3, 2}));
}

TEST(NearestNeighbors, TiesByAscendingId) {
  const NeighborIndex index({{9, dense({0, 1})}, {2, dense({0, 1})}, {5, dense({0, 1})}, {1, dense({1, 0})}});
  EXPECT_EQ(index.nearest(1, 3), (std::vector<UserId>{2, 5, 9}));
}

TEST(NearestNeighbors, UnknownUser) {
  const NeighborIndex index({{1, dense({1})}});
  try {
    index.nearest(2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownUser);
  }
}

TEST(NearestNeighbors, MatchesBruteForceAndIsOrderIndependent) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::pair<UserId, SparseVector>> users;
    for (UserId u = 1; u <= 40; ++u) users.emplace_back(u, gen::random_vector(rng, 12, 0.3));
    const NeighborIndex index(users);

    auto shuffled = users;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const NeighborIndex permuted(shuffled);

    // Power-of-two scaling keeps every distance exactly proportional.
    auto scaled = users;
    for (auto& [id, v] : scaled) v.scale(4.0);
    const NeighborIndex bigger(scaled);

    for (UserId target = 1; target <= 40; ++target) {
      std::vector<std::pair<double, UserId>> brute;
      for (const auto& [id, v] : users) {
        if (id != target) brute.emplace_back(squared_distance(v, users[target - 1].second), id);
      }
      std::sort(brute.begin(), brute.end());
      const auto got = index.nearest(target, 7);
      ASSERT_EQ(got.size(), 7u);
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_NEAR(squared_distance(users[got[i] - 1].second, users[target - 1].second), brute[i].first, 1e-12);
      }
      EXPECT_EQ(permuted.nearest(target, 7), got);
      EXPECT_EQ(bigger.nearest(target, 7), got);
    }
  }
}

TEST(Predict, BlendExamples) {
  const ItemVocabulary vocab({10, 20});
  const NeighborIndex index({{1, dense({1, 0})}, {2, dense({0, 1})}});
  const auto p = predict(1, with_alpha(0.7), index, vocab, 2);
  EXPECT_DOUBLE_EQ(p.scores[0], 0.7);
  EXPECT_DOUBLE_EQ(p.scores[1], 0.3);
  EXPECT_EQ(p.top_items, (std::vector<ItemId>{10, 20}));

  EXPECT_EQ(predict(1, with_alpha(1.0), index, vocab, 2).scores, dense({1, 0}));
  EXPECT_EQ(predict(1, with_alpha(0.0), index, vocab, 2).scores, dense({0, 1}));
}

TEST(Predict, NeighborMean) {
  const ItemVocabulary vocab({1, 2, 3});
  const NeighborIndex index({{1, dense({1, 0, 0})}, {2, dense({0, 1, 0})}, {3, dense({0, 0, 1})}, {4, dense({0, 1, 1})}});
  const auto p = predict(1, with_alpha(0.0, 2), index, vocab, 3);
  // Users 2 and 3 are closer (sqrt 2) than user 4 (sqrt 3).
  EXPECT_DOUBLE_EQ(p.scores[1], 0.5);
  EXPECT_DOUBLE_EQ(p.scores[2], 0.5);
  EXPECT_DOUBLE_EQ(p.scores[0], 0.0);
}

TEST(Predict, AlphaOneIgnoresOthers) {
  const ItemVocabulary vocab({1, 2});
  const NeighborIndex a({{1, dense({0.2, 0.4})}, {2, dense({0, 1})}});
  const NeighborIndex b({{1, dense({0.2, 0.4})}, {3, dense({1, 1})}, {8, dense({0.5, 0})}});
  const NeighborIndex alone({{1, dense({0.2, 0.4})}});
  const auto expected = predict(1, with_alpha(1.0), a, vocab, 2);
  EXPECT_EQ(predict(1, with_alpha(1.0), b, vocab, 2).scores, expected.scores);
  EXPECT_EQ(predict(1, with_alpha(1.0), alone, vocab, 2).scores, expected.scores);
}

TEST(Predict, NeighborlessUser) {
  const ItemVocabulary vocab({1});
  const NeighborIndex alone({{1, dense({1})}});
  try {
    predict(1, with_alpha(0.7), alone, vocab, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NeighborlessUser);
  }
}

TEST(Predict, FromStore) {
  StateStore store(ItemVocabulary({1, 2}), with_alpha(0.5));
  for (UserId u : {1, 2}) {
    std::optional<UserState> state;
    auto out = online::add_basket(state, Basket::make(u, 1, {u}), store.vocab(), store.params());
    store.put_state(u, state, out.delta);
  }
  const auto p = predict(1, store.params(), store, 1);
  EXPECT_DOUBLE_EQ(p.scores[0], 0.5);
  EXPECT_DOUBLE_EQ(p.scores[1], 0.5);
  EXPECT_EQ(p.top_items, std::vector<ItemId>{1});
  EXPECT_EQ(nearest_neighbors(1, 3, store), std::vector<UserId>{2});
}

TEST(TopN, Examples) {
  EXPECT_EQ(top_n(dense({0.2, 0.9, 0.5}), 2), (std::vector<SparseVector::Index>{1, 2}));
  EXPECT_EQ(top_n(dense({0.5, 0.5, 0.5}), 3), (std::vector<SparseVector::Index>{0, 1, 2}));
  EXPECT_EQ(top_n(dense({0, 0.1, 0, 0.3}), 10), (std::vector<SparseVector::Index>{3, 1, 0, 2}));
}

TEST(TopN, ScaleInvariant) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    SparseVector v = gen::random_vector(rng, 30, 0.5);
    const auto ranking = top_n(v, 10);
    v.scale(8.0);
    EXPECT_EQ(top_n(v, 10), ranking);
  }
}
