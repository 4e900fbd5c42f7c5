#include "tifu/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "tifu/engine.hpp"
#include "tifu/error.hpp"
#include "tifu/eval/metrics.hpp"
#include "tifu/store.hpp"

namespace tifu::eval {

namespace {

void run_events(StateStore& store, std::vector<Event> events, unsigned workers) {
  Engine engine(store);
  VectorEventSource source(std::move(events));
  std::string first_error;
  const RunSummary summary = engine.run(source, workers, [&first_error](const UpdateReport& r) {
    if (r.status == ReportStatus::Rejected && first_error.empty()) first_error = r.error;
  });
  if (summary.rejected != 0) {
    throw Error(ErrorCode::ConsistencyViolation,
                std::to_string(summary.rejected) + " training events rejected, first: " + first_error);
  }
}

}  // namespace

MetricsReport evaluate(const Dataset& dataset, const EvalOptions& options) {
  options.params.validate();
  if (options.cutoffs.empty()) throw Error(ErrorCode::InvalidArgument, "at least one cutoff is required");

  MetricsReport report;
  report.cutoffs = options.cutoffs;
  std::vector<const UserBaskets*> eligible;
  for (const auto& u : dataset.users) {
    if (u.baskets.size() >= 2) {
      eligible.push_back(&u);
    } else {
      ++report.users_excluded;
    }
  }

  StateStore store(dataset.vocab, options.params);
  const unsigned workers = std::max(1u, options.workers);

  if (options.mode == EvalMode::Baseline) {
    for (const UserBaskets* u : eligible) {
      const auto train = std::span<const Basket>(u->baskets).first(u->baskets.size() - 1);
      UserState state = train_from_scratch(train, dataset.vocab, options.params);
      store.with_user(u->user, [&](std::optional<UserState>& slot, History& history) {
        history = History(train);
        slot = std::move(state);
      });
    }
  } else {
    std::vector<Event> events;
    std::uint64_t index = 0;
    for (const UserBaskets* u : eligible) {
      for (std::size_t b = 0; b + 1 < u->baskets.size(); ++b) events.push_back(Event{u->baskets[b], index++});
    }
    run_events(store, std::move(events), workers);
  }

  if (options.mode == EvalMode::Decremental && !eligible.empty()) {
    std::mt19937_64 rng(options.seed);
    const auto n_users = static_cast<std::size_t>(
        std::ceil(static_cast<double>(eligible.size()) * options.deletion_user_rate));
    std::vector<const UserBaskets*> chosen;
    std::sample(eligible.begin(), eligible.end(), std::back_inserter(chosen), n_users, rng);

    std::vector<Event> deletions;
    std::uint64_t index = 0;
    for (const UserBaskets* u : chosen) {
      const std::size_t n_train = u->baskets.size() - 1;
      // Keep at least one training basket so the user still gets a prediction.
      const std::size_t wanted = static_cast<std::size_t>(
          std::ceil(static_cast<double>(n_train) * options.deletion_basket_fraction));
      const std::size_t n_delete = std::min(wanted, n_train - 1);
      if (n_delete == 0) continue;
      std::vector<Seq> seqs;
      for (std::size_t b = 0; b < n_train; ++b) seqs.push_back(u->baskets[b].seq);
      std::vector<Seq> victims;
      std::sample(seqs.begin(), seqs.end(), std::back_inserter(victims), n_delete, rng);
      std::shuffle(victims.begin(), victims.end(), rng);
      for (Seq seq : victims) {
        deletions.push_back(Event{online::DeletionRequest{u->user, online::DeleteBasket{seq}}, index++});
      }
      report.deletion_users.push_back(u->user);
      ++report.users_with_deletions;
      report.baskets_deleted += n_delete;
    }
    run_events(store, std::move(deletions), workers);
  }

  const NeighborIndex index = NeighborIndex::from_store(store, options.metric);
  const std::size_t max_cut = *std::max_element(options.cutoffs.begin(), options.cutoffs.end());
  const std::size_t nc = options.cutoffs.size();

  std::vector<UserMetrics> per_user(eligible.size());
  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const UserBaskets& u = *eligible[i];
      const Prediction p = predict(u.user, options.params, index, dataset.vocab, max_cut);
      const std::vector<ItemId>& truth = u.baskets.back().items;
      UserMetrics m{u.user, std::vector<double>(nc), std::vector<double>(nc)};
      for (std::size_t c = 0; c < nc; ++c) {
        m.recall[c] = recall_at(p.top_items, truth, options.cutoffs[c]);
        m.ndcg[c] = ndcg_at(p.top_items, truth, options.cutoffs[c]);
      }
      per_user[i] = std::move(m);
    }
  };
  if (workers == 1 || eligible.size() < 2) {
    score_range(0, eligible.size());
  } else {
    std::vector<std::jthread> threads;
    const std::size_t chunk = (eligible.size() + workers - 1) / workers;
    for (std::size_t begin = 0; begin < eligible.size(); begin += chunk) {
      threads.emplace_back(score_range, begin, std::min(eligible.size(), begin + chunk));
    }
  }

  report.recall.assign(nc, 0.0);
  report.ndcg.assign(nc, 0.0);
  for (const UserMetrics& m : per_user) {
    for (std::size_t c = 0; c < nc; ++c) {
      report.recall[c] += m.recall[c];
      report.ndcg[c] += m.ndcg[c];
    }
  }
  report.users_evaluated = per_user.size();
  if (!per_user.empty()) {
    for (std::size_t c = 0; c < nc; ++c) {
      report.recall[c] /= static_cast<double>(per_user.size());
      report.ndcg[c] /= static_cast<double>(per_user.size());
    }
  }
  if (options.keep_per_user) report.per_user = std::move(per_user);
  return report;
}

}  // namespace tifu::eval
