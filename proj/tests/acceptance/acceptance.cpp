// One PASS/FAIL/SKIP line per acceptance criterion. Exit status is non-zero
// if any criterion fails; skipped criteria (missing public data) do not fail.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/generators.hpp"
#include "support/oracle.hpp"
#include "tifu/decay.hpp"
#include "tifu/engine.hpp"
#include "tifu/error.hpp"
#include "tifu/eval/bench.hpp"
#include "tifu/eval/dataset.hpp"
#include "tifu/eval/evaluate.hpp"
#include "tifu/model.hpp"
#include "tifu/store.hpp"

using namespace tifu;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Result {
  Verdict verdict;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Result()>& check) {
  Result r;
  try {
    r = check();
  } catch (const std::exception& e) {
    r = {Verdict::Fail, std::string("exception: ") + e.what()};
  }
  const char* tag = r.verdict == Verdict::Pass ? "PASS" : r.verdict == Verdict::Fail ? "FAIL" : "SKIP";
  if (r.verdict == Verdict::Fail) ++failures;
  std::printf("%s [%d] %s: %s\n", tag, id, name, r.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<oracle::Dense> dense(const std::vector<SparseVector>& s) {
  std::vector<oracle::Dense> out;
  for (const auto& v : s) out.push_back(v.to_dense());
  return out;
}

std::string snapshot_bytes(const StateStore& store) {
  std::ostringstream out;
  store.write_snapshot(out);
  return out.str();
}

std::vector<long long> ids_of(const ItemVocabulary& vocab) { return {vocab.items().begin(), vocab.items().end()}; }

// Dense reference of a user's model given its composition and history.
oracle::Model oracle_model(const UserState& s, const History& h, const ItemVocabulary& vocab, const HyperParams& p) {
  std::vector<std::vector<std::set<long long>>> groups;
  for (const auto& g : s.composition()) {
    auto& out = groups.emplace_back();
    for (Seq seq : g) out.emplace_back(h.at(seq).items.begin(), h.at(seq).items.end());
  }
  return oracle::tifu(groups, ids_of(vocab), p.basket_decay, p.group_decay);
}

Result multi_hot_golden() {
  const ItemVocabulary vocab({1, 2, 3, 4});
  const auto a = multi_hot(Basket::make(1, 1, {1, 4}), vocab).to_dense();
  const auto b = multi_hot(Basket::make(1, 2, {1, 2, 3}), vocab).to_dense();
  const bool ok = a == std::vector<double>{1, 0, 0, 1} && b == std::vector<double>{1, 1, 1, 0};
  return {ok ? Verdict::Pass : Verdict::Fail, ok ? "[[1,0,0,1],[1,1,1,0]] exact" : "mismatch"};
}

Result decay_oracle_suite() {
  constexpr int kCases = 10000;
  constexpr std::size_t kDim = 8;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> rate(0.5, 1.0);
  std::uniform_int_distribution<std::size_t> len(2, 50);
  double worst_incr = 0, worst_decr = 0, worst_inplace = 0;
  for (int c = 0; c < kCases; ++c) {
    const double r = rate(rng);
    const std::size_t n = len(rng);
    std::vector<SparseVector> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(gen::random_vector(rng, kDim));
    const auto truth = oracle::decayed_average(dense(s), r);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);

    // Incremental: average of the first n-1 elements, then append the last.
    const std::span<const SparseVector> prefix(s.data(), n - 1);
    const decay::DecayedAverage before{decay::decayed_average(prefix, r), n - 1, r};
    worst_incr = std::max(worst_incr,
                          oracle::max_relative_error(decay::incr_update(before, s.back()).value.to_dense(), truth));

    const decay::DecayedAverage full{decay::decayed_average(s, r), n, r};

    const std::size_t i = pick(rng);
    auto without = s;
    without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
    const auto decr = decay::decr_update(full, std::span(s).subspan(i));
    worst_decr = std::max(worst_decr,
                          oracle::max_relative_error(decr.value.to_dense(), oracle::decayed_average(dense(without), r)));

    const std::size_t j = pick(rng);
    auto replaced = s;
    replaced[j] = gen::random_vector(rng, kDim);
    const auto inplace = decay::inplace_update(full, n - 1 - j, s[j], replaced[j]);
    worst_inplace = std::max(
        worst_inplace, oracle::max_relative_error(inplace.value.to_dense(), oracle::decayed_average(dense(replaced), r)));
  }
  const bool ok = worst_incr <= 1e-12 && worst_decr <= 1e-9 && worst_inplace <= 1e-12;
  return {ok ? Verdict::Pass : Verdict::Fail,
          fmt("%d cases/rule; max rel err incr=%.3g (<=1e-12) decr=%.3g (<=1e-9) inplace=%.3g (<=1e-12)", kCases,
              worst_incr, worst_decr, worst_inplace)};
}

Result online_equivalence() {
  constexpr int kSequences = 1000;
  constexpr std::size_t kMaxBaskets = 50, kMaxItems = 20;
  std::mt19937_64 rng(777);
  double worst_mixed = 0, worst_pure = 0;
  std::size_t events = 0, deletions = 0, removals = 0, rejected = 0;
  for (int q = 0; q < kSequences; ++q) {
    std::uniform_int_distribution<std::size_t> group(1, 7), items(1, kMaxItems), baskets(1, kMaxBaskets);
    std::uniform_real_distribution<double> rate(0.5, 1.0), coin(0.0, 1.0);
    HyperParams p;
    p.group_size = group(rng);
    p.basket_decay = rate(rng);
    p.group_decay = rate(rng);
    const std::size_t nv = items(rng);
    const ItemVocabulary vocab = gen::vocab_1_to(nv);

    // Mixed sequence through the engine.
    StateStore store(vocab, p, 4);
    Engine engine(store);
    const std::size_t adds = baskets(rng);
    Seq next = 1;
    std::uint64_t idx = 0;
    std::size_t added = 0;
    while (added < adds || (coin(rng) < 0.5 && store.user_count() > 0)) {
      const auto history = store.get_history(1);
      Event e;
      const double c = coin(rng);
      if (added < adds && (!history || c < 0.6)) {
        e = {Basket::make(1, next++, gen::random_items(rng, nv, 6)), idx++};
        ++added;
      } else if (history) {
        std::vector<Seq> seqs;
        for (const auto& [seq, b] : *history) seqs.push_back(seq);
        std::uniform_int_distribution<std::size_t> pick(0, seqs.size() - 1);
        const Basket& target = history->at(seqs[pick(rng)]);
        if (c < 0.8) {
          e = {online::DeletionRequest{1, online::DeleteBasket{target.seq}}, idx++};
        } else {
          std::uniform_int_distribution<std::size_t> pick_item(0, target.items.size() - 1);
          e = {online::DeletionRequest{1, online::DeleteItem{target.seq, target.items[pick_item(rng)]}}, idx++};
        }
        ++deletions;
      } else {
        break;
      }
      const auto rep = engine.process_event(e);
      ++events;
      if (rep.status == ReportStatus::Rejected) {
        ++rejected;
        continue;
      }
      const auto state = store.get_state(1);
      if (!state) {
        ++removals;
        if (store.get_history(1)) return {Verdict::Fail, "history left behind after removal"};
        continue;
      }
      const History h = *store.get_history(1);
      const UserState exact = recompute_from_groups(1, state->composition(), h, vocab, p);
      const oracle::Model ref = oracle_model(*state, h, vocab, p);
      worst_mixed = std::max({worst_mixed, oracle::max_relative_error(state->vector().to_dense(), exact.vector().to_dense()),
                              oracle::max_relative_error(state->vector().to_dense(), ref.user)});
      for (std::size_t g = 0; g < state->groups.size(); ++g) {
        worst_mixed = std::max(worst_mixed, oracle::max_relative_error(state->groups[g].vector().to_dense(), ref.groups[g]));
      }
    }

    // Pure additions against batch training.
    std::optional<UserState> state;
    std::vector<Basket> batch;
    const std::size_t pure = baskets(rng);
    for (Seq s = 1; s <= pure; ++s) {
      batch.push_back(Basket::make(1, s, gen::random_items(rng, nv, 6)));
      online::add_basket(state, batch.back(), vocab, p);
      const UserState expected = train_from_scratch(batch, vocab, p);
      if (state->composition() != expected.composition()) return {Verdict::Fail, "composition differs from batch"};
      worst_pure = std::max(worst_pure,
                            oracle::max_relative_error(state->vector().to_dense(), expected.vector().to_dense()));
    }
  }
  const bool ok = worst_mixed <= 1e-6 && worst_pure <= 1e-12 && rejected == 0;
  return {ok ? Verdict::Pass : Verdict::Fail,
          fmt("%d sequences, %zu events (%zu deletions, %zu user removals, %zu rejected); max rel err mixed=%.3g "
              "(<=1e-6) pure-add=%.3g (<=1e-12)",
              kSequences, events, deletions, removals, rejected, worst_mixed, worst_pure)};
}

Result engine_determinism() {
  constexpr int kFiles = 100;
  std::size_t total_events = 0;
  for (int f = 0; f < kFiles; ++f) {
    std::mt19937_64 rng(1000 + f);
    std::ostringstream file;
    for (const auto& e : gen::random_events(rng, 40, 1500, 30)) file << format_event_line(e) << '\n';
    const std::string text = file.str();
    HyperParams p;
    p.group_size = 1 + f % 7;

    std::string reference;
    for (unsigned workers : {1u, 8u}) {
      StateStore store(gen::vocab_1_to(30), p);
      Engine engine(store);
      std::istringstream in(text);
      JsonLinesEventSource source(in);
      const auto summary = engine.run(source, workers, [](const UpdateReport&) {});
      if (summary.source_error) return {Verdict::Fail, *summary.source_error};
      if (workers == 1) total_events += summary.events;
      const std::string bytes = snapshot_bytes(store);
      if (workers == 1) {
        reference = bytes;
      } else if (bytes != reference) {
        return {Verdict::Fail, fmt("file %d: snapshots differ between 1 and 8 workers", f)};
      }
    }
  }
  return {Verdict::Pass, fmt("%d files, %zu events each direction, 1 vs 8 workers bitwise-identical snapshots", kFiles,
                             total_events)};
}

Result incremental_latency() {
  const std::vector<std::size_t> grid{100, 1000, 10000};
  const auto report = eval::bench_incremental(grid, 7);
  const double at100 = report.median_nanos_between(50, 150);
  const double at10k = report.median_nanos_between(9900, 10000);
  const double overall = report.median_nanos();
  bool constant = report.samples.size() == 10000;
  for (const auto& s : report.samples) constant = constant && s.touch_count == report.samples.front().touch_count;
  const bool ok = constant && at10k <= 2.0 * at100 && overall <= 1e6;
  return {ok ? Verdict::Pass : Verdict::Fail,
          fmt("median ns at 100=%.0f at 10000=%.0f (ratio %.2f <= 2); touch_count %s (=%zu); overall median %.4f ms "
              "(<= 1 ms; reference ~0.2 ms)",
              at100, at10k, at10k / at100, constant ? "constant" : "NOT constant", report.samples.front().touch_count,
              overall / 1e6)};
}

Result decremental_latency() {
  constexpr std::size_t n = 5000;
  const auto end = eval::bench_decremental(eval::DeletionOrder::FromEnd, n, 1);
  const auto random = eval::bench_decremental(eval::DeletionOrder::Random, n, 1);
  const auto start = eval::bench_decremental(eval::DeletionOrder::FromStart, n, 1);
  const double me = end.mean_touch_count(), mr = random.mean_touch_count(), ms = start.mean_touch_count();
  const bool ordered = me < mr && mr < ms;
  const bool bounded = end.max_touch_count() <= 2;
  const double median_ms = random.median_nanos() / 1e6;
  const bool ok = ordered && bounded && median_ms <= 1.0;
  return {ok ? Verdict::Pass : Verdict::Fail,
          fmt("n=%zu mean touch_count from_end=%.2f < random=%.2f < from_start=%.2f; from_end max=%zu (<= 2); random "
              "median %.4f ms (<= 1 ms)",
              n, me, mr, ms, end.max_touch_count(), median_ms)};
}

Result error_growth() {
  const auto report = eval::error_growth(1000, 300);
  const bool ok = report.log_fit.r_squared > 0.95 && report.log_fit.slope > 0.0;
  const std::string first =
      report.first_step_over_one_percent ? std::to_string(*report.first_step_over_one_percent) : "never";
  return {ok ? Verdict::Pass : Verdict::Fail,
          fmt("m=2 r_g=0.7 r_b=0.9, 1000 built, 300 deleted from the end: slope=%.4f per deletion, R^2=%.5f (> 0.95) "
              "over %zu points; 1%% error first reached after %s deletions (reference ~180, not asserted)",
              report.log_fit.slope, report.log_fit.r_squared, report.log_fit.points, first.c_str())};
}

struct PublicDataset {
  const char* name;
  const char* file;
  eval::IngestOptions options;
  HyperParams params;
};

Result dataset_gated() {
  const char* dir = std::getenv("TIFU_DATA_DIR");
  if (dir == nullptr) {
    return {Verdict::Skip,
            "set TIFU_DATA_DIR to a directory with ta_feng_all_months_merged.csv and/or instacart/ (orders.csv, "
            "order_products__prior.csv) to run"};
  }
  const std::vector<PublicDataset> sets{
      {"TaFeng", "ta_feng_all_months_merged.csv", eval::IngestOptions::tafeng(), HyperParams::tafeng()},
      {"Instacart", "instacart", eval::IngestOptions::instacart(), HyperParams::instacart()},
  };
  std::string detail;
  bool any = false, ok = true;
  for (const auto& ds : sets) {
    const auto path = std::filesystem::path(dir) / ds.file;
    if (!std::filesystem::exists(path)) continue;
    any = true;
    const auto ingest = eval::load_transactions(path, ds.options);
    eval::EvalOptions opt;
    opt.params = ds.params;
    opt.workers = 4;
    opt.mode = eval::EvalMode::Baseline;
    const auto base = eval::evaluate(ingest.dataset, opt);
    opt.mode = eval::EvalMode::Incremental;
    const auto incr = eval::evaluate(ingest.dataset, opt);
    opt.mode = eval::EvalMode::Decremental;
    const auto decr = eval::evaluate(ingest.dataset, opt);
    double incr_gap = 0, decr_gap = 0;
    for (std::size_t c = 0; c < base.cutoffs.size(); ++c) {
      incr_gap = std::max({incr_gap, std::abs(incr.recall[c] - base.recall[c]), std::abs(incr.ndcg[c] - base.ndcg[c])});
      decr_gap = std::max({decr_gap, std::abs(decr.recall[c] - base.recall[c]), std::abs(decr.ndcg[c] - base.ndcg[c])});
    }
    const bool same = incr_gap < 5e-5 && decr_gap < 0.002;
    ok = ok && same;
    detail += fmt("%s users=%zu Recall@10=%.4f NDCG@10=%.4f incr gap=%.1e decr gap=%.1e; ", ds.name,
                  base.users_evaluated, base.recall[0], base.ndcg[0], incr_gap, decr_gap);
    if (std::string(ds.name) == "TaFeng") {
      const bool near = std::abs(base.recall[0] - 0.1298) <= 0.01 && std::abs(base.ndcg[0] - 0.0847) <= 0.01;
      detail += fmt("TaFeng target (0.1298, 0.0847 +-0.01) %s; ", near ? "met" : "missed, see ingest-filter notes");
    }
  }
  if (!any) return {Verdict::Skip, fmt("no known dataset files under %s", dir)};
  return {ok ? Verdict::Pass : Verdict::Fail, detail};
}

}  // namespace

int main() {
  report(1, "multi-hot worked example", multi_hot_golden);
  report(2, "decaying-average rules vs brute force", decay_oracle_suite);
  report(3, "online updates vs recomputation", online_equivalence);
  report(4, "engine determinism across worker counts", engine_determinism);
  report(5, "incremental latency shape", incremental_latency);
  report(6, "decremental latency ordering", decremental_latency);
  report(7, "error growth under repeated deletion", error_growth);
  report(8, "public dataset metrics", dataset_gated);
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
