#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tifu/model.hpp"

namespace tifu::eval {

struct UserBaskets {
  UserId user = 0;
  std::vector<Basket> baskets;  // chronological, seq 1..n
};

struct Dataset {
  std::string name;
  ItemVocabulary vocab;
  std::vector<UserBaskets> users;  // ascending user id

  std::size_t basket_count() const;
  double mean_basket_size() const;
  double mean_baskets_per_user() const;
};

/// How the order/time column is interpreted.
enum class TimeFormat {
  Integer,  // order number or epoch value, compared numerically
  MonthDayYear,  // 11/1/2000, optionally followed by a time
  IsoDate,  // 2000-11-01
};

enum class TransactionFormat {
  Triples,    // generic delimited rows, columns chosen by the options
  TaFeng,     // Kaggle "ta_feng_all_months_merged.csv"
  Instacart,  // directory with orders.csv and order_products__prior.csv
};

struct IngestOptions {
  TransactionFormat format = TransactionFormat::Triples;
  char delimiter = ',';
  bool header = true;
  std::size_t user_column = 0;
  std::size_t order_column = 1;
  std::size_t item_column = 2;
  TimeFormat time_format = TimeFormat::Integer;
  std::size_t min_baskets_per_user = 1;
  /// Above this fraction of malformed rows ingestion fails outright.
  double max_malformed_fraction = 0.01;
  std::string name;

  static IngestOptions tafeng();
  static IngestOptions instacart();
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  Dataset dataset;
  std::size_t rows = 0;
  std::vector<RowError> errors;
};

/// Groups rows by (user, order) into baskets, orders each user's baskets by
/// the order key and numbers them 1..n.
IngestResult load_transactions(const std::filesystem::path& path, const IngestOptions& options);
IngestResult load_transactions(std::istream& in, const IngestOptions& options);

/// Datasets are stored as event files made only of "add" lines.
void write_dataset(const Dataset& dataset, std::ostream& out);
Dataset read_dataset(std::istream& in, std::string name = {});
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace tifu::eval
