#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "lgest/matrix.hpp"

namespace lgest::harness {

/// Shortest decimal rendering of a double that parses back to the same bits.
inline std::string render_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string render_u64(std::uint64_t v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Thrown on malformed CSV input; message carries file and line context.
struct CsvError : Error {
  using Error::Error;
};

/// Minimal CSV table: one header row, then numeric data rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t num_cols() const { return header.size(); }
  std::size_t num_rows() const { return rows.size(); }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_double_field(const std::string& field,
                                 const std::string& context) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw CsvError(context + ": cannot parse numeric field '" + field + "'");
  }
  return v;
}

/// Reads a CSV file with a header row; every data row must have the header's
/// column count and parse as doubles.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw CsvError("cannot open CSV file '" + path + "'");
  }
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (line_no == 1) {
      table.header = fields;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw CsvError(path + ":" + std::to_string(line_no) + ": expected " +
                     std::to_string(table.header.size()) + " fields, got " +
                     std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      row.push_back(
          parse_double_field(f, path + ":" + std::to_string(line_no)));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) {
    throw CsvError(path + ": empty CSV file");
  }
  return table;
}

/// Reads a headerless rectangular CSV of numbers as a Matrix.
inline Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw CsvError("cannot open CSV file '" + path + "'");
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      row.push_back(
          parse_double_field(f, path + ":" + std::to_string(line_no)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw CsvError(path + ":" + std::to_string(line_no) +
                     ": ragged row (expected " +
                     std::to_string(rows.front().size()) + " fields)");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw CsvError(path + ": empty CSV file");
  }
  Matrix m(rows.size(), rows.front().size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.front().size(); ++j) {
      m(i, j) = rows[i][j];
    }
  }
  return m;
}

/// Accumulates CSV text in memory; nothing touches the filesystem until
/// write_file, so a failure mid-build leaves no partial output behind.
class CsvBuilder {
 public:
  explicit CsvBuilder(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ += ',';
      out_ += header[i];
    }
    out_ += '\n';
    cols_ = header.size();
  }

  void add_row(const std::vector<double>& row) {
    if (row.size() != cols_) {
      throw CsvError("CsvBuilder: row has " + std::to_string(row.size()) +
                     " fields, header has " + std::to_string(cols_));
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out_ += ',';
      out_ += render_double(row[i]);
    }
    out_ += '\n';
  }

  const std::string& text() const { return out_; }

 private:
  std::string out_;
  std::size_t cols_ = 0;
};

/// Writes the full content in one shot.
inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open output file '" + path + "'");
  }
  out << content;
  if (!out) {
    throw Error("failed writing output file '" + path + "'");
  }
}

}  // namespace lgest::harness
