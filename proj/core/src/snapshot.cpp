#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "tifu/error.hpp"
#include "tifu/store.hpp"

// Snapshot layout: the text line "TIFUKNN-SNAPSHOT 1\n", then little-endian
// binary. Hyper-parameters, the vocabulary, a user count, and one
// length-prefixed record per user in ascending user id order.

namespace tifu {

namespace {

constexpr std::string_view kMagic = "TIFUKNN-SNAPSHOT 1\n";

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { bytes_.append(s); }
  void append(const Writer& other) { bytes_.append(other.bytes_); }
  std::size_t size() const noexcept { return bytes_.size(); }
  const std::string& bytes() const noexcept { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  std::uint64_t offset() const noexcept { return pos_; }
  bool at_end() const noexcept { return pos_ == bytes_.size(); }

  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) throw SnapshotCorrupt(pos_, std::string("truncated ") + what);
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::int64_t i64(const char* what) { return static_cast<std::int64_t>(u64(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  // Element counts are bounded by the bytes left so a corrupt count cannot
  // trigger a huge allocation.
  std::uint64_t count(std::size_t min_element_bytes, const char* what) {
    const std::uint64_t at = pos_;
    const std::uint64_t n = u64(what);
    if (min_element_bytes > 0 && n > (bytes_.size() - pos_) / min_element_bytes) {
      throw SnapshotCorrupt(at, std::string("implausible ") + what);
    }
    return n;
  }
  bool starts_with(std::string_view prefix) {
    if (bytes_.compare(0, prefix.size(), prefix) != 0) return false;
    pos_ = prefix.size();
    return true;
  }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

void write_average(Writer& w, const decay::DecayedAverage& avg) {
  w.u64(avg.count);
  w.f64(avg.rate);
  w.u64(avg.value.dimension());
  w.u64(avg.value.nnz());
  for (const auto& e : avg.value.entries()) {
    w.u32(e.index);
    w.f64(e.value);
  }
}

decay::DecayedAverage read_average(Reader& r) {
  decay::DecayedAverage avg;
  avg.count = r.u64("average count");
  avg.rate = r.f64("average rate");
  const std::uint64_t dim = r.u64("vector dimension");
  const std::uint64_t at = r.offset();
  const std::uint64_t nnz = r.count(12, "vector entry count");
  if (nnz > dim) throw SnapshotCorrupt(at, "more entries than dimensions");
  std::vector<SparseVector::Entry> entries;
  entries.reserve(nnz);
  for (std::uint64_t i = 0; i < nnz; ++i) {
    const std::uint64_t entry_at = r.offset();
    SparseVector::Entry e{r.u32("entry index"), r.f64("entry value")};
    if (e.index >= dim || e.value == 0.0 || (!entries.empty() && e.index <= entries.back().index)) {
      throw SnapshotCorrupt(entry_at, "invalid sparse entry");
    }
    entries.push_back(e);
  }
  avg.value = SparseVector::from_entries(dim, std::move(entries));
  return avg;
}

}  // namespace

void StateStore::write_snapshot(std::ostream& out) const {
  Writer w;
  w.raw(kMagic);
  w.u64(params_.group_size);
  w.f64(params_.basket_decay);
  w.f64(params_.group_decay);
  w.u64(params_.neighbors);
  w.f64(params_.alpha);
  w.u64(vocab_->size());
  for (ItemId item : vocab_->items()) w.i64(item);

  auto encode_record = [](UserId id, const Record& rec) {
    Writer body;
    body.i64(id);
    body.u64(rec.history.size());
    for (const auto& [seq, basket] : rec.history) {
      body.u64(seq);
      body.i64(basket.timestamp);
      body.u64(basket.items.size());
      for (ItemId item : basket.items) body.i64(item);
    }
    body.u32(rec.state ? 1 : 0);
    if (rec.state) {
      const UserState& s = *rec.state;
      body.u64(s.basket_count);
      body.u64(s.groups.size());
      for (const Group& g : s.groups) {
        body.u64(g.baskets.size());
        for (Seq seq : g.baskets) body.u64(seq);
        write_average(body, g.average);
      }
      write_average(body, s.user_vector);
    }
    return body;
  };

  std::vector<std::pair<UserId, Writer>> records;
  for (std::size_t i = 0; i < shard_count_; ++i) {
    std::lock_guard lock(shards_[i].mutex);
    for (const auto& [id, rec] : shards_[i].records) records.emplace_back(id, encode_record(id, rec));
  }
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  w.u64(records.size());
  for (const auto& [id, body] : records) {
    w.u64(body.size());
    w.append(body);
  }
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.size()));
  if (!out) throw Error(ErrorCode::Io, "failed to write snapshot");
}

void StateStore::snapshot(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  write_snapshot(out);
}

StateStore StateStore::read_snapshot(std::istream& in) {
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes));
  if (!r.starts_with(kMagic)) throw SnapshotCorrupt(0, "missing snapshot header");

  HyperParams params;
  params.group_size = r.u64("group size");
  params.basket_decay = r.f64("basket decay");
  params.group_decay = r.f64("group decay");
  params.neighbors = r.u64("neighbor count");
  params.alpha = r.f64("alpha");
  try {
    params.validate();
  } catch (const Error& e) {
    throw SnapshotCorrupt(r.offset(), std::string("bad hyper-parameters: ") + e.what());
  }

  const std::uint64_t vocab_at = r.offset();
  const std::uint64_t n_items = r.count(8, "vocabulary size");
  std::vector<ItemId> items;
  items.reserve(n_items);
  for (std::uint64_t i = 0; i < n_items; ++i) items.push_back(r.i64("vocabulary item"));
  if (!std::is_sorted(items.begin(), items.end()) ||
      std::adjacent_find(items.begin(), items.end()) != items.end()) {
    throw SnapshotCorrupt(vocab_at, "vocabulary not strictly ascending");
  }
  StateStore store(ItemVocabulary(std::move(items)), params);

  const std::uint64_t n_users = r.count(8, "user count");
  for (std::uint64_t u = 0; u < n_users; ++u) {
    const std::uint64_t length = r.u64("record length");
    const std::uint64_t start = r.offset();
    r.need(length, "user record");
    const UserId id = r.i64("user id");

    Record rec;
    const std::uint64_t n_baskets = r.count(24, "basket count");
    for (std::uint64_t b = 0; b < n_baskets; ++b) {
      const std::uint64_t basket_at = r.offset();
      Basket basket;
      basket.user = id;
      basket.seq = r.u64("basket seq");
      basket.timestamp = r.i64("basket timestamp");
      const std::uint64_t n_basket_items = r.count(8, "basket item count");
      for (std::uint64_t i = 0; i < n_basket_items; ++i) basket.items.push_back(r.i64("basket item"));
      if (basket.items.empty() || !std::is_sorted(basket.items.begin(), basket.items.end())) {
        throw SnapshotCorrupt(basket_at, "malformed basket");
      }
      try {
        rec.history.append(std::move(basket));
      } catch (const Error&) {
        throw SnapshotCorrupt(basket_at, "duplicate basket seq");
      }
    }

    if (r.u32("state flag") != 0) {
      UserState s;
      s.user = id;
      s.basket_count = r.u64("state basket count");
      const std::uint64_t n_groups = r.count(8, "group count");
      for (std::uint64_t g = 0; g < n_groups; ++g) {
        Group group;
        const std::uint64_t n_refs = r.count(8, "group ref count");
        for (std::uint64_t i = 0; i < n_refs; ++i) group.baskets.push_back(r.u64("group ref"));
        group.average = read_average(r);
        s.groups.push_back(std::move(group));
      }
      s.user_vector = read_average(r);
      rec.state = std::move(s);
    }
    if (r.offset() - start != length) throw SnapshotCorrupt(start, "record length mismatch");

    Shard& shard = store.shard_for(id);
    if (!shard.records.emplace(id, std::move(rec)).second) throw SnapshotCorrupt(start, "duplicate user");
  }
  if (!r.at_end()) throw SnapshotCorrupt(r.offset(), "trailing bytes");

  try {
    store.check_integrity();
  } catch (const Error& e) {
    throw SnapshotCorrupt(r.offset(), e.what());
  }
  return store;
}

StateStore StateStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open snapshot " + path.string());
  return read_snapshot(in);
}

}  // namespace tifu
