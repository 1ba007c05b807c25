#include "despd/cli/chain.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>

namespace despd::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

bool is_iso_date(const std::string& s) {
  static const std::regex pattern(
      R"(\d{4}-(0[1-9]|1[0-2])-(0[1-9]|[12]\d|3[01])(T\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?)?)");
  return std::regex_match(s, pattern);
}

double metadata_number(int line, const std::string& key, std::string_view value) {
  const auto v = parse_number(value);
  if (!v || !std::isfinite(*v)) throw ParseError(line, "metadata '" + key + "' is not a number");
  return *v;
}

}  // namespace

ParseError::ParseError(int line, const std::string& what)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

double ChainMetadata::discount_scale() const { return std::exp(rate * tau); }

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Chain parse_chain(std::istream& in) {
  Chain chain;
  bool have_rate = false, have_tau = false, have_date = false, have_header = false;
  std::string raw;
  int line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '#') {
      if (have_header) throw ParseError(line_no, "metadata after the header");
      const std::string_view body = trim(line.substr(1));
      const auto eq = body.find('=');
      const std::string key(trim(body.substr(0, eq == std::string_view::npos ? 0 : eq)));
      if (!is_identifier(key)) continue;  // plain comment
      const std::string_view value = trim(body.substr(eq + 1));
      if (key == "rate") {
        if (have_rate) throw ParseError(line_no, "duplicate metadata 'rate'");
        chain.metadata.rate = metadata_number(line_no, key, value);
        have_rate = true;
      } else if (key == "tau") {
        if (have_tau) throw ParseError(line_no, "duplicate metadata 'tau'");
        chain.metadata.tau = metadata_number(line_no, key, value);
        if (chain.metadata.tau < 0.0) throw ParseError(line_no, "tau must be non-negative");
        have_tau = true;
      } else if (key == "spot") {
        if (chain.metadata.spot) throw ParseError(line_no, "duplicate metadata 'spot'");
        chain.metadata.spot = metadata_number(line_no, key, value);
        if (*chain.metadata.spot <= 0.0) throw ParseError(line_no, "spot must be positive");
      } else if (key == "observation_date") {
        if (have_date) throw ParseError(line_no, "duplicate metadata 'observation_date'");
        chain.metadata.observation_date = std::string(value);
        if (!is_iso_date(chain.metadata.observation_date)) {
          throw ParseError(line_no, "observation_date is not ISO-8601");
        }
        have_date = true;
      } else {
        throw ParseError(line_no, "unknown metadata key '" + key + "'");
      }
      continue;
    }

    const auto fields = split_fields(line);
    if (!have_header) {
      const std::vector<std::string> expected{"side", "strike", "price", "bid", "ask"};
      if (fields != expected) {
        throw ParseError(line_no, "header must be exactly side,strike,price,bid,ask");
      }
      if (!have_rate) throw ParseError(line_no, "missing metadata 'rate'");
      if (!have_tau) throw ParseError(line_no, "missing metadata 'tau'");
      if (!have_date) throw ParseError(line_no, "missing metadata 'observation_date'");
      have_header = true;
      continue;
    }

    if (fields.size() != 5) {
      throw ParseError(line_no, "expected 5 fields, got " + std::to_string(fields.size()));
    }
    ++chain.data_rows;
    OptionQuote q;
    if (fields[0] == "call") {
      q.side = OptionSide::Call;
    } else if (fields[0] == "put") {
      q.side = OptionSide::Put;
    } else {
      throw ParseError(line_no, "side must be 'call' or 'put'");
    }
    const auto strike = parse_number(fields[1]);
    const auto price = parse_number(fields[2]);
    if (!strike || !std::isfinite(*strike)) throw ParseError(line_no, "bad strike");
    if (!price || !std::isfinite(*price)) throw ParseError(line_no, "bad price");
    q.strike = *strike;
    q.price = *price;
    for (int c = 3; c < 5; ++c) {
      if (fields[static_cast<std::size_t>(c)].empty()) continue;
      const auto v = parse_number(fields[static_cast<std::size_t>(c)]);
      if (!v || !std::isfinite(*v)) throw ParseError(line_no, c == 3 ? "bad bid" : "bad ask");
      (c == 3 ? q.bid : q.ask) = *v;
    }

    if (q.strike <= 0.0) {
      chain.dropped.push_back({line_no, "non-positive strike"});
      continue;
    }
    if (q.price < 0.0) {
      chain.dropped.push_back({line_no, "negative price"});
      continue;
    }
    if ((q.bid && *q.bid < 0.0) || (q.ask && *q.ask < 0.0)) {
      chain.dropped.push_back({line_no, "negative bid or ask"});
      continue;
    }
    if (q.bid && q.ask && *q.bid > *q.ask) {
      chain.dropped.push_back({line_no, "crossed bid/ask"});
      continue;
    }
    chain.quotes.push_back(q);
  }

  if (!have_header) throw ParseError(line_no, "no header line found");
  if (chain.quotes.empty()) {
    throw EmptyChain("chain has no valid rows (" + std::to_string(chain.data_rows) + " read)");
  }
  const double scale = chain.metadata.discount_scale();
  for (auto& q : chain.quotes) {
    q.price *= scale;
    if (q.bid) *q.bid *= scale;
    if (q.ask) *q.ask *= scale;
  }
  return chain;
}

Chain ingest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open chain file " + path.string());
  return parse_chain(in);
}

}  // namespace despd::cli
