#pragma once

// CSV input and output. A header row is mandatory; every row must be
// rectangular; a selected cell that is empty or fails to parse is an error
// naming the 1-based row and the column, never a silent NaN.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "dcv/sample.hpp"
#include "dcv/space.hpp"

namespace dcv {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw std::invalid_argument("csv: no column named '" + name + "'");
  }
};

namespace detail {

// One record, RFC-style quoting ("" escapes a quote inside a quoted field).
// Returns false at end of input.
inline bool read_record(std::istream& in, std::vector<std::string>& fields,
                        std::size_t line_no) {
  fields.clear();
  std::string field;
  bool quoted = false;
  bool any = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (quoted)
    throw std::runtime_error("csv parse error at line " + std::to_string(line_no) +
                             ": unterminated quoted field");
  if (!any) return false;
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(std::move(field));
  return true;
}

}  // namespace detail

[[nodiscard]] inline CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::vector<std::string> fields;
  if (!detail::read_record(in, fields, 1))
    throw std::runtime_error("csv parse error: missing header row");
  table.header = fields;
  std::size_t line = 2;
  while (detail::read_record(in, fields, line)) {
    if (fields.size() != table.header.size())
      throw std::runtime_error("csv parse error at line " + std::to_string(line) +
                               ": expected " + std::to_string(table.header.size()) +
                               " fields, found " + std::to_string(fields.size()));
    table.rows.push_back(fields);
    ++line;
  }
  return table;
}

[[nodiscard]] inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return parse_csv(in);
}

// Strict full-token double; empty cells and trailing junk are errors.
[[nodiscard]] inline double csv_double(const CsvTable& table, std::size_t row,
                                       std::size_t col) {
  const std::string& cell = table.rows[row][col];
  const std::string where = " at data row " + std::to_string(row + 1) + ", column '" +
                            table.header[col] + "'";
  if (cell.empty()) throw std::runtime_error("csv parse error: missing value" + where);
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw std::runtime_error("csv parse error: '" + cell + "' is not a number" + where);
  return value;
}

// Shortest round-trip decimal form.
[[nodiscard]] inline std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

inline void write_csv(std::ostream& out, std::span<const std::string> header,
                      std::span<const std::vector<std::string>> rows) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << ',';
    out << header[c];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << row[c];
    }
    out << '\n';
  }
}

struct ColumnSelection {
  std::vector<std::string> x_columns;
  std::vector<std::string> y_columns;
  // A symbolic side uses exactly one column; values are mapped to symbols by
  // first appearance, so any relabeling of the raw strings is immaterial.
  bool x_symbolic = false;
  bool y_symbolic = false;
};

namespace detail {

inline std::vector<Point> csv_points(const CsvTable& table,
                                     const std::vector<std::string>& columns,
                                     bool symbolic, std::optional<Space>& space) {
  if (columns.empty())
    throw std::invalid_argument("csv: at least one column must be selected");
  std::vector<Point> points;
  points.reserve(table.rows.size());
  if (symbolic) {
    if (columns.size() != 1)
      throw std::invalid_argument("csv: a symbolic side takes exactly one column");
    const std::size_t col = table.column(columns[0]);
    std::map<std::string, std::int64_t> codes;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const std::string& cell = table.rows[r][col];
      if (cell.empty())
        throw std::runtime_error("csv parse error: missing value at data row " +
                                 std::to_string(r + 1) + ", column '" + columns[0] + "'");
      const auto [it, inserted] =
          codes.insert({cell, static_cast<std::int64_t>(codes.size())});
      points.push_back(Point::symbol(it->second));
    }
    const auto distinct = static_cast<std::int64_t>(codes.size());
    if (!space) {
      space = Space::discrete(std::max<std::int64_t>(distinct, 1));
    } else {
      if (space->kind() != SpaceKind::discrete)
        throw std::invalid_argument("csv: symbolic column needs a discrete space");
      if (space->alphabet() < distinct)
        throw std::invalid_argument("csv: column holds " + std::to_string(distinct) +
                                    " distinct symbols, alphabet is " +
                                    std::to_string(space->alphabet()));
    }
  } else {
    std::vector<std::size_t> cols;
    cols.reserve(columns.size());
    for (const auto& name : columns) cols.push_back(table.column(name));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c)
        v[static_cast<Eigen::Index>(c)] = csv_double(table, r, cols[c]);
      points.push_back(Point::vector(std::move(v)));
    }
    if (!space) {
      space = Space::euclidean(static_cast<Eigen::Index>(cols.size()));
    } else if (space->kind() == SpaceKind::discrete ||
               space->dim() != static_cast<Eigen::Index>(cols.size())) {
      throw std::invalid_argument("csv: selected " + std::to_string(cols.size()) +
                                  " columns, which does not match the configured space");
    }
  }
  return points;
}

}  // namespace detail

// Builds a paired sample from a table. Spaces may be supplied (and are then
// validated against the data) or inferred: Euclidean of the column count, or
// discrete of the distinct-symbol count.
[[nodiscard]] inline PairedSample sample_from_csv(const CsvTable& table,
                                                  const ColumnSelection& sel,
                                                  std::optional<Space> space_x = {},
                                                  std::optional<Space> space_y = {}) {
  if (table.rows.empty()) throw std::runtime_error("csv: no data rows");
  std::vector<Point> xs = detail::csv_points(table, sel.x_columns, sel.x_symbolic, space_x);
  std::vector<Point> ys = detail::csv_points(table, sel.y_columns, sel.y_symbolic, space_y);
  return PairedSample(std::move(xs), std::move(ys), *space_x, *space_y);
}

}  // namespace dcv
