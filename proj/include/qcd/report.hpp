#pragma once

// CurveTable: a labeled rectangular result set, and its CSV dialect.
//
//   # command: <name>            metadata lines, '#'-prefixed "key: value"
//   # parameters: <flags>        flags that re-run the command exactly
//   # version: <version>
//   # units: <unit>,<unit>,...
//   name,name,...                header row
//   v,v,...                      rows, reals at 17 significant digits
//   # key: value                 optional trailer lines

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace qcd::report {

inline constexpr std::string_view kVersion = "0.1.0";

struct Column {
  std::string name;
  std::string unit;
};

using MetaList = std::vector<std::pair<std::string, std::string>>;

struct CurveTable {
  std::vector<Column> columns;
  std::vector<std::vector<double>> rows;
  MetaList metadata;  // command, parameters, version, seed, ...
  MetaList trailer;   // written after the rows

  std::optional<std::string> meta(std::string_view key) const {
    for (const auto& [k, v] : metadata) {
      if (k == key) return v;
    }
    return std::nullopt;
  }

  std::size_t column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i].name == name) return i;
    }
    throw std::out_of_range("no column named " + std::string(name));
  }

  void add_row(std::vector<double> row) {
    if (row.size() != columns.size()) {
      throw std::logic_error("CurveTable: row arity " + std::to_string(row.size()) +
                             " does not match " + std::to_string(columns.size()) + " columns");
    }
    rows.push_back(std::move(row));
  }
};

/// Real at 17 significant digits, round-trip exact.
inline std::string format_real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

/// Shortest round-trip form, for labels and parameter echoes.
inline std::string format_short(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline void write_csv(std::ostream& os, const CurveTable& t) {
  for (const auto& [k, v] : t.metadata) os << "# " << k << ": " << v << '\n';
  os << "# units: ";
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    os << (i ? "," : "") << t.columns[i].unit;
  }
  os << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    os << (i ? "," : "") << t.columns[i].name;
  }
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_real(row[i]);
    os << '\n';
  }
  for (const auto& [k, v] : t.trailer) os << "# " << k << ": " << v << '\n';
}

inline std::string to_csv(const CurveTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

class CsvParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_real(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto r = std::from_chars(first, s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw CsvParseError("line " + std::to_string(line_no) + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

/// Parses CSV written by write_csv. Anything else is rejected.
inline CurveTable read_csv(std::istream& is) {
  CurveTable t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<std::string> units;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string body = line.substr(line.find_first_not_of("# "));
      const std::size_t colon = body.find(": ");
      if (colon == std::string::npos) continue;
      std::pair<std::string, std::string> kv{body.substr(0, colon), body.substr(colon + 2)};
      if (!have_header) {
        if (kv.first == "units") {
          units = detail::split(kv.second, ',');
        } else {
          t.metadata.push_back(std::move(kv));
        }
      } else {
        t.trailer.push_back(std::move(kv));
      }
      continue;
    }
    if (!have_header) {
      for (auto& name : detail::split(line, ',')) t.columns.push_back({name, ""});
      if (units.size() == t.columns.size()) {
        for (std::size_t i = 0; i < units.size(); ++i) t.columns[i].unit = units[i];
      }
      have_header = true;
      continue;
    }
    const auto cells = detail::split(line, ',');
    if (cells.size() != t.columns.size()) {
      throw CsvParseError("line " + std::to_string(line_no) + ": expected " +
                          std::to_string(t.columns.size()) + " fields, found " +
                          std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(detail::parse_real(c, line_no));
    t.rows.push_back(std::move(row));
  }
  if (!t.meta("command")) throw CsvParseError("missing '# command:' metadata; not produced by qcd");
  if (!have_header) throw CsvParseError("missing header row");
  if (t.rows.empty()) throw CsvParseError("table has no data rows");
  return t;
}

}  // namespace qcd::report
