#pragma once

#include "despd/errors.hpp"
#include "despd/types.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace despd::cli {

/// Malformed chain or realizations file. line() is 1-based, 0 when the
/// problem is not tied to one line (missing metadata, unreadable file).
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Every data row of a chain was rejected.
class EmptyChain : public Error {
 public:
  using Error::Error;
};

struct ChainMetadata {
  std::optional<double> spot;
  double rate = 0.0;
  double tau = 0.0;
  std::string observation_date;

  /// exp(r tau), applied to every price at ingestion.
  double discount_scale() const;
};

struct DroppedRow {
  int line = 0;
  std::string reason;
};

struct Chain {
  ChainMetadata metadata;
  /// Discount-scaled quotes in file order.
  std::vector<OptionQuote> quotes;
  /// Rows that parsed but were rejected (negative price, crossed market...).
  std::vector<DroppedRow> dropped;
  int data_rows = 0;
};

/// Reads a chain file:
///
///   # rate=0.05
///   # tau=0.25
///   # observation_date=2024-01-19
///   # spot=4800          (optional)
///   side,strike,price,bid,ask
///   put,4500,12.5,12.3,12.7
///   call,4900,20.1,,
///
/// Metadata lines precede the header. Numbers use '.' regardless of locale.
Chain parse_chain(std::istream& in);
Chain ingest(const std::filesystem::path& path);

/// Locale-free decimal parse of the whole field; nullopt on any junk.
std::optional<double> parse_number(std::string_view text);

/// Splits one CSV line on commas. No quoting is supported.
std::vector<std::string> split_fields(std::string_view line);

}  // namespace despd::cli
