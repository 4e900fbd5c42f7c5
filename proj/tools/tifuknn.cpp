// tifuknn: dataset ingestion, evaluation, event processing, recommendation
// and the single-user benchmarks. Every command writes line-delimited JSON.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tifu/engine.hpp"
#include "tifu/error.hpp"
#include "tifu/eval/bench.hpp"
#include "tifu/eval/dataset.hpp"
#include "tifu/eval/evaluate.hpp"
#include "tifu/recommend.hpp"
#include "tifu/store.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tifu;

namespace {

constexpr const char* kDownloadHint =
    "public datasets: TaFeng https://www.kaggle.com/datasets/chiranjivdas09/ta-feng-grocery-dataset "
    "(ta_feng_all_months_merged.csv), Instacart https://www.kaggle.com/c/instacart-market-basket-analysis "
    "(orders.csv, order_products__prior.csv)";

/// Writes to a file when a path is given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw Error(ErrorCode::Io, "cannot write " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void line(const json& j) { stream() << j.dump() << '\n'; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct ParamFlags {
  std::string preset = "tafeng";
  std::optional<std::size_t> m, k;
  std::optional<double> rb, rg, alpha;

  void attach(CLI::App* app) {
    app->add_option("--preset", preset, "tafeng | instacart | valued-shopper")
        ->check(CLI::IsMember({"tafeng", "instacart", "valued-shopper"}));
    app->add_option("--m", m, "group size");
    app->add_option("--rb", rb, "within-group decay rate");
    app->add_option("--rg", rg, "across-group decay rate");
    app->add_option("--k", k, "number of neighbors");
    app->add_option("--alpha", alpha, "weight of the user's own vector");
  }

  HyperParams resolve() const {
    HyperParams p = preset == "instacart"        ? HyperParams::instacart()
                    : preset == "valued-shopper" ? HyperParams::valued_shopper()
                                                 : HyperParams::tafeng();
    if (m) p.group_size = *m;
    if (rb) p.basket_decay = *rb;
    if (rg) p.group_decay = *rg;
    if (k) p.neighbors = *k;
    if (alpha) p.alpha = *alpha;
    p.validate();
    return p;
  }
};

json params_json(const HyperParams& p) {
  return {{"m", p.group_size}, {"rb", p.basket_decay}, {"rg", p.group_decay}, {"k", p.neighbors}, {"alpha", p.alpha}};
}

void require_exists(const fs::path& path) {
  if (!fs::exists(path)) {
    throw Error(ErrorCode::Io, path.string() + " not found; " + kDownloadHint);
  }
}

// ingest

struct IngestArgs {
  std::string input, output, format = "triples", time_format = "integer";
  std::size_t user_col = 0, order_col = 1, item_col = 2, min_baskets = 1;
  char delimiter = ',';
  bool no_header = false;
};

int cmd_ingest(const IngestArgs& a) {
  require_exists(a.input);
  eval::IngestOptions opt;
  if (a.format == "tafeng") {
    opt = eval::IngestOptions::tafeng();
  } else if (a.format == "instacart") {
    opt = eval::IngestOptions::instacart();
  } else {
    opt.user_column = a.user_col;
    opt.order_column = a.order_col;
    opt.item_column = a.item_col;
    opt.delimiter = a.delimiter;
    opt.header = !a.no_header;
    opt.time_format = a.time_format == "mdy"   ? eval::TimeFormat::MonthDayYear
                      : a.time_format == "iso" ? eval::TimeFormat::IsoDate
                                               : eval::TimeFormat::Integer;
  }
  opt.min_baskets_per_user = a.min_baskets;
  if (opt.name.empty()) opt.name = fs::path(a.input).stem().string();

  const auto result = eval::load_transactions(a.input, opt);
  for (const auto& e : result.errors) std::cerr << "line " << e.line << ": " << e.message << '\n';
  {
    std::ofstream out(a.output);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + a.output);
    eval::write_dataset(result.dataset, out);
  }
  const auto& d = result.dataset;
  Output(std::string()).line({{"dataset", d.name},
                              {"rows", result.rows},
                              {"malformed_rows", result.errors.size()},
                              {"users", d.users.size()},
                              {"items", d.vocab.size()},
                              {"baskets", d.basket_count()},
                              {"avg_basket_size", d.mean_basket_size()},
                              {"avg_baskets_per_user", d.mean_baskets_per_user()},
                              {"output", a.output}});
  return 0;
}

// evaluate

struct EvaluateArgs {
  std::string dataset, mode = "baseline", output;
  ParamFlags params;
  std::uint64_t seed = 42;
  std::vector<std::size_t> cutoffs{10, 20};
  unsigned workers = 1;
  double deletion_user_rate = 1.0 / 1000.0;
  double deletion_basket_fraction = 0.1;
  bool per_user = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
  require_exists(a.dataset);
  const eval::Dataset d = eval::read_dataset(fs::path(a.dataset));
  eval::EvalOptions opt;
  opt.params = a.params.resolve();
  opt.mode = a.mode == "incremental"   ? eval::EvalMode::Incremental
             : a.mode == "decremental" ? eval::EvalMode::Decremental
                                       : eval::EvalMode::Baseline;
  opt.seed = a.seed;
  opt.cutoffs = a.cutoffs;
  opt.workers = a.workers;
  opt.deletion_user_rate = a.deletion_user_rate;
  opt.deletion_basket_fraction = a.deletion_basket_fraction;
  opt.keep_per_user = a.per_user;

  const auto report = eval::evaluate(d, opt);
  Output out(a.output);
  json summary{{"dataset", d.name},
               {"mode", a.mode},
               {"seed", a.seed},
               {"params", params_json(opt.params)},
               {"users_evaluated", report.users_evaluated},
               {"users_excluded", report.users_excluded},
               {"users_with_deletions", report.users_with_deletions},
               {"baskets_deleted", report.baskets_deleted}};
  for (std::size_t c = 0; c < report.cutoffs.size(); ++c) {
    const std::string k = std::to_string(report.cutoffs[c]);
    summary["recall@" + k] = report.recall[c];
    summary["ndcg@" + k] = report.ndcg[c];
  }
  out.line(summary);
  for (const auto& u : report.per_user) {
    json line{{"user", u.user}};
    for (std::size_t c = 0; c < report.cutoffs.size(); ++c) {
      const std::string k = std::to_string(report.cutoffs[c]);
      line["recall@" + k] = u.recall[c];
      line["ndcg@" + k] = u.ndcg[c];
    }
    out.line(line);
  }
  return 0;
}

// run

struct RunArgs {
  std::string events, reports, snapshot, load, vocab;
  ParamFlags params;
  unsigned workers = 1;
};

ItemVocabulary scan_vocab(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  JsonLinesEventSource source(in);
  std::set<ItemId> items;
  while (auto e = source.next()) {
    if (const auto* b = std::get_if<Basket>(&e->payload)) items.insert(b->items.begin(), b->items.end());
  }
  return ItemVocabulary({items.begin(), items.end()});
}

ItemVocabulary read_vocab(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::vector<ItemId> items;
  for (ItemId id; in >> id;) items.push_back(id);
  if (!in.eof()) throw Error(ErrorCode::MalformedInput, "vocabulary file must hold one integer item id per line");
  return ItemVocabulary(std::move(items));
}

int cmd_run(const RunArgs& a) {
  const bool from_stdin = a.events == "-";
  std::optional<StateStore> store;
  if (!a.load.empty()) {
    store.emplace(StateStore::load(a.load));
  } else {
    if (from_stdin && a.vocab.empty()) {
      throw Error(ErrorCode::InvalidArgument, "reading events from stdin needs --vocab or --load");
    }
    store.emplace(a.vocab.empty() ? scan_vocab(a.events) : read_vocab(a.vocab), a.params.resolve());
  }

  std::ifstream file;
  if (!from_stdin) {
    file.open(a.events);
    if (!file) throw Error(ErrorCode::Io, "cannot open " + a.events);
  }
  JsonLinesEventSource source(from_stdin ? std::cin : file);
  Output out(a.reports);
  Engine engine(*store);
  const auto summary =
      engine.run(source, a.workers, [&](const UpdateReport& r) { out.stream() << format_report_line(r) << '\n'; });
  out.stream().flush();
  if (!a.snapshot.empty()) store->snapshot(a.snapshot);

  json s{{"events", summary.events}, {"rejected", summary.rejected}, {"users", store->user_count()}};
  if (!a.snapshot.empty()) s["snapshot"] = a.snapshot;
  if (summary.source_error) s["source_error"] = *summary.source_error;
  std::cerr << s.dump() << '\n';
  return summary.source_error ? 1 : 0;
}

// recommend

struct RecommendArgs {
  std::string snapshot;
  std::vector<UserId> users;
  std::size_t n = 10;
  std::optional<std::size_t> k;
  std::optional<double> alpha;
};

int cmd_recommend(const RecommendArgs& a) {
  const StateStore store = StateStore::load(a.snapshot);
  HyperParams p = store.params();
  if (a.k) p.neighbors = *a.k;
  if (a.alpha) p.alpha = *a.alpha;
  p.validate();
  const NeighborIndex index = NeighborIndex::from_store(store);
  Output out{std::string()};
  int status = 0;
  for (UserId user : a.users) {
    try {
      const Prediction pred = predict(user, p, index, store.vocab(), a.n);
      json scores = json::array();
      for (ItemId item : pred.top_items) scores.push_back(pred.scores[store.vocab().index_of(item)]);
      out.line({{"user", user}, {"items", pred.top_items}, {"scores", scores}});
    } catch (const Error& e) {
      out.line({{"user", user}, {"error", e.what()}});
      status = 1;
    }
  }
  return status;
}

// benchmarks

eval::DeletionOrder parse_order(const std::string& s) {
  if (s == "from_start") return eval::DeletionOrder::FromStart;
  if (s == "random") return eval::DeletionOrder::Random;
  return eval::DeletionOrder::FromEnd;
}

struct BenchArgs {
  std::string output, order = "from_end";
  std::vector<std::size_t> grid{100, 1000, 10000};
  std::size_t repetitions = 5, n = 5000, build = 1000, deletions = 300;
  std::uint64_t seed = 0;
  std::optional<std::size_t> m;
  std::optional<double> rb, rg;

  HyperParams params() const {
    HyperParams p = eval::single_user_params();
    if (m) p.group_size = *m;
    if (rb) p.basket_decay = *rb;
    if (rg) p.group_decay = *rg;
    p.validate();
    return p;
  }
};

void write_latency(const eval::LatencyReport& r, Output& out) {
  for (const auto& s : r.samples) {
    out.line({{"experiment", r.experiment},
              {"history_size", s.history_size},
              {"nanos", s.nanos},
              {"touch_count", s.touch_count}});
  }
  std::cerr << json{{"experiment", r.experiment},
                    {"samples", r.samples.size()},
                    {"median_nanos", r.median_nanos()},
                    {"mean_touch_count", r.mean_touch_count()},
                    {"max_touch_count", r.max_touch_count()}}
                   .dump()
            << '\n';
}

int cmd_bench_incr(const BenchArgs& a) {
  Output out(a.output);
  write_latency(eval::bench_incremental(a.grid, a.repetitions, a.params()), out);
  return 0;
}

int cmd_bench_decr(const BenchArgs& a) {
  Output out(a.output);
  write_latency(eval::bench_decremental(parse_order(a.order), a.n, a.seed, a.params()), out);
  return 0;
}

int cmd_bench_error(const BenchArgs& a) {
  const auto r = eval::error_growth(a.build, a.deletions, parse_order(a.order), a.seed, a.params());
  Output out(a.output);
  for (std::size_t s = 0; s < r.relative_error.size(); ++s) {
    out.line({{"experiment", "error_growth"}, {"step", s}, {"relative_error", r.relative_error[s]}});
  }
  json fit{{"experiment", "error_growth_fit"},
           {"slope", r.log_fit.slope},
           {"intercept", r.log_fit.intercept},
           {"r_squared", r.log_fit.r_squared},
           {"points", r.log_fit.points},
           {"fit_floor", r.fit_floor}};
  fit["first_step_over_one_percent"] =
      r.first_step_over_one_percent ? json(*r.first_step_over_one_percent) : json(nullptr);
  out.line(fit);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TIFU-kNN next-basket recommendation with online additions and deletions"};
  app.require_subcommand(1);
  std::function<int()> action;

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "group transaction rows into a dataset file");
  c_ingest->add_option("input", ingest.input, "transactions file, or directory for instacart")->required();
  c_ingest->add_option("-o,--output", ingest.output, "dataset file to write")->required();
  c_ingest->add_option("--format", ingest.format)->check(CLI::IsMember({"triples", "tafeng", "instacart"}));
  c_ingest->add_option("--user-col", ingest.user_col);
  c_ingest->add_option("--order-col", ingest.order_col, "order id or timestamp column");
  c_ingest->add_option("--item-col", ingest.item_col);
  c_ingest->add_option("--delimiter", ingest.delimiter);
  c_ingest->add_option("--time-format", ingest.time_format)->check(CLI::IsMember({"integer", "mdy", "iso"}));
  c_ingest->add_flag("--no-header", ingest.no_header);
  c_ingest->add_option("--min-baskets", ingest.min_baskets, "drop users with fewer baskets");
  c_ingest->callback([&] { action = [&] { return cmd_ingest(ingest); }; });

  EvaluateArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "leave-last-out Recall@K and NDCG@K");
  c_eval->add_option("dataset", evaluate.dataset, "dataset file written by ingest")->required();
  evaluate.params.attach(c_eval);
  c_eval->add_option("--mode", evaluate.mode)->check(CLI::IsMember({"baseline", "incremental", "decremental"}));
  c_eval->add_option("--seed", evaluate.seed);
  c_eval->add_option("--cutoffs", evaluate.cutoffs)->delimiter(',');
  c_eval->add_option("--workers", evaluate.workers)->check(CLI::PositiveNumber);
  c_eval->add_option("--deletion-user-rate", evaluate.deletion_user_rate);
  c_eval->add_option("--deletion-fraction", evaluate.deletion_basket_fraction);
  c_eval->add_flag("--per-user", evaluate.per_user, "also emit one line per evaluated user");
  c_eval->add_option("-o,--output", evaluate.output);
  c_eval->callback([&] { action = [&] { return cmd_evaluate(evaluate); }; });

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "apply an event file and stream update reports");
  c_run->add_option("events", run.events, "event file, - for stdin")->required();
  c_run->add_option("--workers", run.workers)->check(CLI::PositiveNumber);
  c_run->add_option("--snapshot", run.snapshot, "write the final store here");
  c_run->add_option("--load", run.load, "start from this snapshot");
  c_run->add_option("--vocab", run.vocab, "item ids, one per line (default: scan the event file)");
  c_run->add_option("-o,--reports", run.reports);
  run.params.attach(c_run);
  c_run->callback([&] { action = [&] { return cmd_run(run); }; });

  RecommendArgs rec;
  auto* c_rec = app.add_subcommand("recommend", "top-N items for users of a snapshot");
  c_rec->add_option("snapshot", rec.snapshot)->required();
  c_rec->add_option("--user", rec.users)->required();
  c_rec->add_option("-n", rec.n)->check(CLI::PositiveNumber);
  c_rec->add_option("--k", rec.k);
  c_rec->add_option("--alpha", rec.alpha);
  c_rec->callback([&] { action = [&] { return cmd_recommend(rec); }; });

  BenchArgs bench;
  auto bench_params = [&](CLI::App* c) {
    c->add_option("-o,--output", bench.output);
    c->add_option("--m", bench.m);
    c->add_option("--rb", bench.rb);
    c->add_option("--rg", bench.rg);
  };
  auto* c_bi = app.add_subcommand("bench-incr", "per-addition latency for a single user and item");
  c_bi->add_option("--grid", bench.grid, "history sizes; additions run up to the largest")->delimiter(',');
  c_bi->add_option("--repetitions", bench.repetitions)->check(CLI::PositiveNumber);
  bench_params(c_bi);
  c_bi->callback([&] { action = [&] { return cmd_bench_incr(bench); }; });

  auto* c_bd = app.add_subcommand("bench-decr", "per-deletion latency for a single user and item");
  c_bd->add_option("--order", bench.order)->check(CLI::IsMember({"from_end", "from_start", "random"}));
  c_bd->add_option("--n", bench.n)->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
  c_bd->add_option("--seed", bench.seed);
  bench_params(c_bd);
  c_bd->callback([&] { action = [&] { return cmd_bench_decr(bench); }; });

  auto* c_be = app.add_subcommand("bench-error", "relative error of the online vector under repeated deletion");
  c_be->add_option("--build", bench.build);
  c_be->add_option("--deletions", bench.deletions);
  c_be->add_option("--order", bench.order)->check(CLI::IsMember({"from_end", "from_start", "random"}));
  c_be->add_option("--seed", bench.seed);
  bench_params(c_be);
  c_be->callback([&] { action = [&] { return cmd_bench_error(bench); }; });

  CLI11_PARSE(app, argc, argv);
  try {
    return action();
  } catch (const std::exception& e) {
    std::cerr << "tifuknn: " << e.what() << '\n';
    return 2;
  }
}
