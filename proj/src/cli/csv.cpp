#include "vfsm/cli/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace vfsm::cli {

namespace {

struct Cell {
  std::string text;
  long column;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<Cell> split(const std::string& line) {
  std::vector<Cell> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const std::string raw = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                          : comma - start);
    out.push_back(Cell{trim(raw), static_cast<long>(out.size()) + 1});
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool blank(const std::string& line) { return trim(line).empty(); }

double parse_cell(const Cell& cell, long line, const std::string& source) {
  const char* begin = cell.text.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (cell.text.empty() || end != begin + cell.text.size() || errno == ERANGE ||
      !std::isfinite(v)) {
    throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(cell.column) +
                         ": not a finite number: '" + cell.text + "'",
                     line, cell.column);
  }
  return v;
}

// Parses the header and returns the number of x columns; y_required selects
// whether the last column must be "y".
Index parse_header(const std::vector<Cell>& cells, bool y_required, bool& has_y,
                   const std::string& source, long line) {
  has_y = !cells.empty() && cells.back().text == "y";
  if (y_required && !has_y) {
    throw ParseError(source + ":" + std::to_string(line) + ": header must end with column 'y'",
                     line, cells.empty() ? 1 : cells.back().column);
  }
  const Index d = static_cast<Index>(cells.size()) - (has_y ? 1 : 0);
  if (d < 1) throw ParseError(source + ": header names no input columns", line, 1);
  for (Index k = 0; k < d; ++k) {
    const Cell& c = cells[static_cast<std::size_t>(k)];
    if (c.text != "x" + std::to_string(k + 1)) {
      throw ParseError(source + ":" + std::to_string(line) + ":" + std::to_string(c.column) +
                           ": expected header 'x" + std::to_string(k + 1) + "', found '" +
                           c.text + "'",
                       line, c.column);
    }
  }
  return d;
}

Matrix read_rows(std::istream& in, const std::string& source, bool y_required, bool& has_y,
                 Index& d) {
  std::string line;
  long number = 0;
  d = -1;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++number;
    if (blank(line)) continue;
    const auto cells = split(line);
    if (d < 0) {
      d = parse_header(cells, y_required, has_y, source, number);
      continue;
    }
    const std::size_t width = static_cast<std::size_t>(d + (has_y ? 1 : 0));
    if (cells.size() != width) {
      const long col = static_cast<long>(std::min(cells.size(), width)) + 1;
      throw ParseError(source + ":" + std::to_string(number) + ": expected " +
                           std::to_string(width) + " columns, found " +
                           std::to_string(cells.size()),
                       number, col);
    }
    std::vector<double> row;
    row.reserve(width);
    for (const Cell& c : cells) row.push_back(parse_cell(c, number, source));
    rows.push_back(std::move(row));
  }
  if (d < 0) throw ParseError(source + ": missing header row", number + 1, 1);
  if (rows.empty()) throw ParseError(source + ": no data rows", number + 1, 1);
  const Index width = d + (has_y ? 1 : 0);
  Matrix out(static_cast<Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Index k = 0; k < width; ++k) {
      out(static_cast<Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
    }
  }
  return out;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return in;
}

}  // namespace

Dataset read_dataset(std::istream& in, const std::string& source) {
  bool has_y = false;
  Index d = 0;
  const Matrix m = read_rows(in, source, true, has_y, d);
  return Dataset{m.leftCols(d), m.col(d)};
}

Dataset read_dataset_file(const std::string& path) {
  auto in = open(path);
  return read_dataset(in, path);
}

Matrix read_points(std::istream& in, const std::string& source) {
  bool has_y = false;
  Index d = 0;
  const Matrix m = read_rows(in, source, false, has_y, d);
  return m.leftCols(d);
}

Matrix read_points_file(const std::string& path) {
  auto in = open(path);
  return read_points(in, path);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  std::vector<std::string> header;
  for (Index k = 0; k < data.dimension(); ++k) header.push_back("x" + std::to_string(k + 1));
  header.push_back("y");
  Matrix rows(data.size(), data.dimension() + 1);
  rows << data.x, data.y;
  write_table(out, header, rows);
}

void write_table(std::ostream& out, const std::vector<std::string>& header, const Matrix& rows) {
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index k = 0; k < rows.cols(); ++k) out << (k ? "," : "") << format_double(rows(i, k));
    out << '\n';
  }
}

}  // namespace vfsm::cli
