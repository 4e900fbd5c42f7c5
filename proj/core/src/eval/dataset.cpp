#include "tifu/eval/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "tifu/engine.hpp"
#include "tifu/error.hpp"

namespace tifu::eval {

std::size_t Dataset::basket_count() const {
  return std::accumulate(users.begin(), users.end(), std::size_t{0},
                         [](std::size_t n, const UserBaskets& u) { return n + u.baskets.size(); });
}

double Dataset::mean_basket_size() const {
  std::size_t items = 0;
  for (const auto& u : users)
    for (const auto& b : u.baskets) items += b.items.size();
  const std::size_t n = basket_count();
  return n == 0 ? 0.0 : static_cast<double>(items) / static_cast<double>(n);
}

double Dataset::mean_baskets_per_user() const {
  return users.empty() ? 0.0 : static_cast<double>(basket_count()) / static_cast<double>(users.size());
}

IngestOptions IngestOptions::tafeng() {
  IngestOptions o;
  o.format = TransactionFormat::TaFeng;
  o.user_column = 1;
  o.order_column = 0;
  o.item_column = 5;
  o.time_format = TimeFormat::MonthDayYear;
  o.name = "TaFeng";
  return o;
}

IngestOptions IngestOptions::instacart() {
  IngestOptions o;
  o.format = TransactionFormat::Instacart;
  o.name = "Instacart";
  return o;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    std::string_view cell = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '"')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '"' || cell.back() == '\r')) cell.remove_suffix(1);
    out.push_back(cell);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool parse_time(std::string_view s, TimeFormat format, std::int64_t& out) {
  if (format == TimeFormat::Integer) return parse_int(s, out);
  if (const auto space = s.find(' '); space != std::string_view::npos) s = s.substr(0, space);
  const char sep = format == TimeFormat::MonthDayYear ? '/' : '-';
  const auto parts = split(s, sep);
  if (parts.size() != 3) return false;
  std::int64_t a, b, c;
  if (!parse_int(parts[0], a) || !parse_int(parts[1], b) || !parse_int(parts[2], c)) return false;
  const std::int64_t year = format == TimeFormat::MonthDayYear ? c : a;
  const std::int64_t month = format == TimeFormat::MonthDayYear ? a : b;
  const std::int64_t day = format == TimeFormat::MonthDayYear ? b : c;
  if (month < 1 || month > 12 || day < 1 || day > 31) return false;
  out = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86'400'000;
  return true;
}

struct Row {
  UserId user;
  std::int64_t order_key;   // groups rows into baskets
  std::int64_t time_key;    // orders baskets
  std::int64_t timestamp;
  ItemId item;
};

class RowCollector {
 public:
  explicit RowCollector(const IngestOptions& options) : options_(options) {}

  void add(const Row& row) {
    auto& user = baskets_[row.user];
    auto& basket = user[row.order_key];
    basket.time_key = row.time_key;
    basket.timestamp = row.timestamp;
    basket.items.push_back(row.item);
  }

  Dataset finish(std::string name) {
    Dataset ds;
    ds.name = std::move(name);
    std::vector<ItemId> items;
    for (auto& [user, orders] : baskets_) {
      if (orders.size() < options_.min_baskets_per_user) continue;
      std::vector<const Pending*> sorted;
      for (const auto& [key, p] : orders) sorted.push_back(&p);
      std::stable_sort(sorted.begin(), sorted.end(),
                       [](const Pending* a, const Pending* b) { return a->time_key < b->time_key; });
      UserBaskets ub{user, {}};
      Seq seq = 1;
      for (const Pending* p : sorted) {
        ub.baskets.push_back(Basket::make(user, seq++, p->items, p->timestamp));
        items.insert(items.end(), p->items.begin(), p->items.end());
      }
      ds.users.push_back(std::move(ub));
    }
    ds.vocab = ItemVocabulary(std::move(items));
    return ds;
  }

 private:
  struct Pending {
    std::int64_t time_key = 0;
    std::int64_t timestamp = 0;
    std::vector<ItemId> items;
  };
  const IngestOptions& options_;
  std::map<UserId, std::map<std::int64_t, Pending>> baskets_;
};

void check_malformed(const IngestResult& result, const IngestOptions& options) {
  if (result.rows == 0) return;
  const double fraction = static_cast<double>(result.errors.size()) / static_cast<double>(result.rows);
  if (fraction > options.max_malformed_fraction) {
    std::ostringstream msg;
    msg << result.errors.size() << " of " << result.rows << " rows malformed";
    if (!result.errors.empty()) msg << " (first at line " << result.errors.front().line << ": " << result.errors.front().message << ")";
    throw Error(ErrorCode::MalformedInput, msg.str());
  }
}

IngestResult load_rows(std::istream& in, const IngestOptions& options) {
  IngestResult result;
  RowCollector collector(options);
  std::string line;
  std::size_t lineno = 0;
  const std::size_t needed = std::max({options.user_column, options.order_column, options.item_column}) + 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && options.header) continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++result.rows;
    const auto cells = split(line, options.delimiter);
    if (cells.size() < needed) {
      result.errors.push_back({lineno, "expected at least " + std::to_string(needed) + " columns"});
      continue;
    }
    Row row{};
    if (!parse_int(cells[options.user_column], row.user)) {
      result.errors.push_back({lineno, "bad user id"});
      continue;
    }
    if (!parse_time(cells[options.order_column], options.time_format, row.time_key)) {
      result.errors.push_back({lineno, "bad order/time value"});
      continue;
    }
    if (!parse_int(cells[options.item_column], row.item)) {
      result.errors.push_back({lineno, "bad item id"});
      continue;
    }
    row.order_key = row.time_key;
    row.timestamp = options.time_format == TimeFormat::Integer ? 0 : row.time_key;
    collector.add(row);
  }
  check_malformed(result, options);
  result.dataset = collector.finish(options.name);
  return result;
}

IngestResult load_instacart(const std::filesystem::path& dir, const IngestOptions& options) {
  std::ifstream orders(dir / "orders.csv");
  std::ifstream products(dir / "order_products__prior.csv");
  if (!orders || !products) {
    throw Error(ErrorCode::Io, "expected orders.csv and order_products__prior.csv in " + dir.string());
  }
  IngestResult result;
  struct Order {
    UserId user;
    std::int64_t number;
  };
  std::unordered_map<std::int64_t, Order> by_id;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(orders, line)) {
    if (++lineno == 1) continue;
    const auto cells = split(line, ',');
    std::int64_t id, user, number;
    if (cells.size() < 4 || !parse_int(cells[0], id) || !parse_int(cells[1], user) || !parse_int(cells[3], number)) {
      result.errors.push_back({lineno, "orders.csv: malformed row"});
      continue;
    }
    if (cells[2] == "prior") by_id.emplace(id, Order{user, number});
  }
  RowCollector collector(options);
  lineno = 0;
  while (std::getline(products, line)) {
    if (++lineno == 1) continue;
    ++result.rows;
    const auto cells = split(line, ',');
    std::int64_t order_id, item;
    if (cells.size() < 2 || !parse_int(cells[0], order_id) || !parse_int(cells[1], item)) {
      result.errors.push_back({lineno, "order_products__prior.csv: malformed row"});
      continue;
    }
    auto it = by_id.find(order_id);
    if (it == by_id.end()) {
      result.errors.push_back({lineno, "unknown order id"});
      continue;
    }
    collector.add({it->second.user, order_id, it->second.number, 0, item});
  }
  check_malformed(result, options);
  result.dataset = collector.finish(options.name);
  return result;
}

}  // namespace

IngestResult load_transactions(std::istream& in, const IngestOptions& options) {
  if (options.format == TransactionFormat::Instacart) {
    throw Error(ErrorCode::InvalidArgument, "the instacart format reads a directory, not a stream");
  }
  return load_rows(in, options);
}

IngestResult load_transactions(const std::filesystem::path& path, const IngestOptions& options) {
  if (options.format == TransactionFormat::Instacart) return load_instacart(path, options);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return load_rows(in, options);
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  std::uint64_t index = 0;
  for (const auto& user : dataset.users) {
    for (const auto& basket : user.baskets) out << format_event_line(Event{basket, index++}) << '\n';
  }
}

Dataset read_dataset(std::istream& in, std::string name) {
  JsonLinesEventSource source(in);
  std::map<UserId, std::vector<Basket>> users;
  std::vector<ItemId> items;
  while (auto event = source.next()) {
    if (event->is_deletion()) throw Error(ErrorCode::MalformedInput, "dataset files contain only add events");
    auto& basket = std::get<Basket>(event->payload);
    items.insert(items.end(), basket.items.begin(), basket.items.end());
    users[basket.user].push_back(std::move(basket));
  }
  Dataset ds;
  ds.name = std::move(name);
  for (auto& [user, baskets] : users) {
    std::sort(baskets.begin(), baskets.end(), [](const Basket& a, const Basket& b) { return a.seq < b.seq; });
    ds.users.push_back({user, std::move(baskets)});
  }
  ds.vocab = ItemVocabulary(std::move(items));
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open dataset " + path.string());
  return read_dataset(in, path.stem().string());
}

}  // namespace tifu::eval
