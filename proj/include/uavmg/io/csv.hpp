#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "uavmg/errors.hpp"

namespace uavmg::io {

// Shortest representation that parses back to the same double.
inline std::string format_exact(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Rounds to 6 significant digits, matching what format_g6 writes.
inline double round_g6(double v) {
  return std::strtod(format_g6(v).c_str(), nullptr);
}

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// Line-oriented reader for headered, comma-separated files. Blank lines and
// lines starting with '#' are skipped; the latter are kept in `comments`.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Reads the header and checks it against `expected`. An empty file is a
  // parse error: every format carries a header.
  void expect_header(const std::vector<std::string>& expected) {
    CsvRow row;
    if (!next(row)) throw ParseError(source_, line_ + 1, 1, "missing header");
    for (std::size_t c = 0; c < expected.size(); ++c) {
      if (c >= row.fields.size()) {
        throw ParseError(source_, row.line, c + 1, "missing column '" + expected[c] + "'");
      }
      if (row.fields[c] != expected[c]) {
        throw ParseError(source_, row.line, c + 1,
                         "expected column '" + expected[c] + "', got '" + row.fields[c] + "'");
      }
    }
    if (row.fields.size() > expected.size()) {
      throw ParseError(source_, row.line, expected.size() + 1, "unexpected column '" +
                                                                   row.fields[expected.size()] + "'");
    }
    columns_ = expected.size();
  }

  // Next data row with exactly the header's column count.
  bool next_record(CsvRow& row) {
    if (!next(row)) return false;
    if (row.fields.size() != columns_) {
      const std::size_t col = std::min(row.fields.size(), columns_) + 1;
      throw ParseError(source_, row.line, col,
                       "expected " + std::to_string(columns_) + " fields, got " +
                           std::to_string(row.fields.size()));
    }
    return true;
  }

  double number(const CsvRow& row, std::size_t col) const {
    const std::string& f = row.fields[col];
    double v = 0;
    const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || r.ec != std::errc() || r.ptr != f.data() + f.size() || !std::isfinite(v)) {
      throw ParseError(source_, row.line, col + 1, "not a finite number: '" + f + "'");
    }
    return v;
  }

  std::size_t index(const CsvRow& row, std::size_t col) const {
    const std::string& f = row.fields[col];
    std::size_t v = 0;
    const auto r = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || r.ec != std::errc() || r.ptr != f.data() + f.size()) {
      throw ParseError(source_, row.line, col + 1, "not a non-negative integer: '" + f + "'");
    }
    return v;
  }

  const std::string& text(const CsvRow& row, std::size_t col) const {
    if (row.fields[col].empty()) throw ParseError(source_, row.line, col + 1, "empty field");
    return row.fields[col];
  }

  const std::vector<std::string>& comments() const { return comments_; }
  const std::string& source() const { return source_; }

 private:
  bool next(CsvRow& row) {
    std::string s;
    while (std::getline(in_, s)) {
      ++line_;
      if (!s.empty() && s.back() == '\r') s.pop_back();
      if (s.empty()) continue;
      if (s.front() == '#') {
        comments_.push_back(s);
        continue;
      }
      row.line = line_;
      row.fields.clear();
      std::size_t start = 0;
      for (;;) {
        const std::size_t comma = s.find(',', start);
        row.fields.push_back(s.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return true;
    }
    return false;
  }

  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
  std::size_t columns_ = 0;
  std::vector<std::string> comments_;
};

inline std::string join_header(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) s += ',';
    s += cols[c];
  }
  return s;
}

}  // namespace uavmg::io
