#pragma once

// CSV ingestion/serialization and atomic file writes.  Numbers are written
// with the shortest round-trip representation (std::to_chars) and parsed
// with std::from_chars, so files are locale-independent and byte-stable.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "jpen/errors.hpp"
#include "jpen/matrix.hpp"

namespace jpen {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Writes to `<path>.tmp` in the same directory and renames into place, so a
// crash can never leave a half-written file under the final name.
inline void atomic_write_text(const std::filesystem::path& path,
                              const std::string& text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw ValidationError("cannot open '" + tmp.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out)
      throw ValidationError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw ValidationError("cannot rename '" + tmp.string() + "' to '" +
                          path.string() + "': " + ec.message());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline double parse_field(std::string_view field, int line, int column) {
  // Trim plain spaces; anything else must parse completely.
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  double value = 0.0;
  const auto res =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw ParseError("line " + std::to_string(line) + ", column " +
                     std::to_string(column) + ": cannot parse '" +
                     std::string(field) + "' as a number");
  if (!std::isfinite(value))
    throw ParseError("line " + std::to_string(line) + ", column " +
                     std::to_string(column) + ": non-finite value");
  return value;
}

// Splits text into lines; tolerates a trailing newline and CRLF endings,
// skips lines that are entirely empty.
inline std::vector<std::pair<int, std::string_view>> split_lines(
    std::string_view text) {
  std::vector<std::pair<int, std::string_view>> lines;
  int number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number;
    if (!line.empty()) lines.emplace_back(number, line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

}  // namespace detail

// Rectangular numeric table; `header` skips the first non-empty line.
inline Eigen::MatrixXd read_table(const std::filesystem::path& path,
                                  bool header = false) {
  const std::string text = read_text(path);
  auto lines = detail::split_lines(text);
  if (header && !lines.empty()) lines.erase(lines.begin());
  if (lines.empty())
    throw ParseError("'" + path.string() + "': no data rows");
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  for (const auto& [number, line] : lines) {
    const auto fields = detail::split_fields(line);
    if (rows.empty()) {
      width = fields.size();
    } else if (fields.size() != width) {
      throw ParseError("'" + path.string() + "': line " +
                       std::to_string(number) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(width));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      row[c] = detail::parse_field(fields[c], number, static_cast<int>(c) + 1);
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<int>(rows.size()), static_cast<int>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      m(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  return m;
}

inline DataMatrix read_data_csv(const std::filesystem::path& path,
                                bool header = false) {
  return DataMatrix(read_table(path, header));
}

// Square symmetric matrix; asymmetry beyond a relative 1e-12 is rejected.
inline SymMatrix read_matrix_csv(const std::filesystem::path& path) {
  const Eigen::MatrixXd m = read_table(path, false);
  if (m.rows() != m.cols())
    throw ParseError("'" + path.string() + "': matrix is " +
                     std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", expected square");
  try {
    return SymMatrix::from_dense(m);
  } catch (const ValidationError& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

struct LabeledData {
  DataMatrix x;
  std::vector<int> labels;
};

// Numeric table whose `label_col` (default: last column) holds integer 0/1
// class labels; the remaining columns become the feature matrix.
inline LabeledData read_labeled_csv(const std::filesystem::path& path,
                                    bool header = false, int label_col = -1) {
  const Eigen::MatrixXd m = read_table(path, header);
  const int cols = static_cast<int>(m.cols());
  if (cols < 2)
    throw ParseError("'" + path.string() +
                     "': need at least one feature column plus the label");
  const int lc = label_col < 0 ? cols - 1 : label_col;
  if (lc >= cols)
    throw ParameterError("label column " + std::to_string(lc) +
                         " out of range for " + std::to_string(cols) +
                         " columns");
  std::vector<int> labels(static_cast<std::size_t>(m.rows()));
  for (int r = 0; r < m.rows(); ++r) {
    const double v = m(r, lc);
    if (v != 0.0 && v != 1.0)
      throw ParseError("'" + path.string() + "': row " + std::to_string(r + 1) +
                       ": label must be 0 or 1, got " + format_double(v));
    labels[static_cast<std::size_t>(r)] = static_cast<int>(v);
  }
  Eigen::MatrixXd x(m.rows(), cols - 1);
  for (int c = 0, at = 0; c < cols; ++c) {
    if (c == lc) continue;
    x.col(at++) = m.col(c);
  }
  return LabeledData{DataMatrix(std::move(x)), std::move(labels)};
}

inline std::string matrix_to_csv(const SymMatrix& m) {
  std::string out;
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = 0; j < m.dim(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

inline std::string table_to_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

inline std::string pattern_to_csv(const SymPattern& pat) {
  std::string out;
  for (int i = 0; i < pat.dim(); ++i) {
    for (int j = 0; j < pat.dim(); ++j) {
      if (j) out += ',';
      out += pat(i, j) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

}  // namespace jpen
