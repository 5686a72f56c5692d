#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cellcov {

/// File could not be opened, read, or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input line. The message names the source and line number.
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::invalid_argument(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct CsvRow {
  std::size_t line = 0;
  std::vector<double> fields;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace detail

/// Reads comma-separated numeric rows. Lines starting with '#' and blank
/// lines are skipped; every other line must hold between min_cols and
/// max_cols finite numbers.
inline std::vector<CsvRow> read_numeric_csv(std::istream& in, const std::string& source,
                                            std::size_t min_cols, std::size_t max_cols) {
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    CsvRow row{lineno, {}};
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      const auto cell = body.substr(start, comma == std::string_view::npos
                                               ? std::string_view::npos
                                               : comma - start);
      double v = 0.0;
      if (!detail::parse_double(cell, v) || !std::isfinite(v)) {
        throw ParseError(source, lineno,
                         "expected a finite number, got '" + std::string(cell) + "'");
      }
      row.fields.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (row.fields.size() < min_cols || row.fields.size() > max_cols) {
      throw ParseError(source, lineno,
                       "expected " + std::to_string(min_cols) +
                           (min_cols == max_cols ? "" : "-" + std::to_string(max_cols)) +
                           " columns, got " + std::to_string(row.fields.size()));
    }
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read failure on " + source);
  return rows;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace cellcov
