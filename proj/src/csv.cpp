#include "pclda/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pclda/error.hpp"

namespace pclda {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string where(const std::string& source, std::size_t line_no) {
  return source + ":" + std::to_string(line_no);
}

}  // namespace

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::vector<double> cells;
  Eigen::Index cols = -1;
  Eigen::Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (first) {
      first = false;
      bool numeric = true;
      for (auto f : fields) numeric = numeric && parse_double(f).has_value();
      if (!numeric) {
        for (auto f : fields) table.header.emplace_back(f);
        cols = static_cast<Eigen::Index>(fields.size());
        continue;
      }
    }
    if (cols < 0) cols = static_cast<Eigen::Index>(fields.size());
    if (static_cast<Eigen::Index>(fields.size()) != cols) {
      throw FormatError(where(source, line_no) + ": expected " + std::to_string(cols) +
                        " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const auto v = parse_double(fields[j]);
      if (!v) {
        throw FormatError(where(source, line_no) + ": field " + std::to_string(j + 1) +
                          " ('" + std::string(fields[j]) + "') is not a number");
      }
      if (!std::isfinite(*v)) {
        throw FormatError(where(source, line_no) + ": field " + std::to_string(j + 1) +
                          " is not finite");
      }
      cells.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0) throw FormatError(source + ": no data rows");
  table.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>(cells.data(), rows, cols);
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open file");
  return parse_csv(in, path);
}

void write_csv(std::ostream& out, const Matrix& values, const std::vector<std::string>& header) {
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  if (!header.empty()) out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      out << (j ? "," : "") << format_double(values(i, j));
    }
    out << '\n';
  }
}

void write_csv(const std::string& path, const Matrix& values,
               const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw FormatError(path + ": cannot open for writing");
  write_csv(out, values, header);
}

std::vector<int> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open file");
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto field = trim(line);
    if (field.empty()) continue;
    const auto v = parse_double(split_fields(field).front());
    if (!v) {
      if (first) {
        first = false;
        continue;
      }
      throw FormatError(where(path, line_no) + ": label '" + std::string(field) +
                        "' is not an integer");
    }
    first = false;
    if (*v != std::floor(*v) || *v < 0) {
      throw FormatError(where(path, line_no) + ": label must be a nonnegative integer");
    }
    labels.push_back(static_cast<int>(*v));
  }
  if (labels.empty()) throw FormatError(path + ": no labels");
  return labels;
}

std::vector<int> take_label_column(CsvTable& table, Eigen::Index col, const std::string& source) {
  const Eigen::Index cols = table.values.cols();
  if (col < 0 || col >= cols) {
    throw FormatError(source + ": label column " + std::to_string(col) + " out of range (" +
                      std::to_string(cols) + " columns)");
  }
  if (cols < 2) throw FormatError(source + ": no feature columns besides the label");
  std::vector<int> labels(static_cast<std::size_t>(table.values.rows()));
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    const double v = table.values(i, col);
    if (v != std::floor(v) || v < 0) {
      throw FormatError(source + ": data row " + std::to_string(i + 1) +
                        ": label must be a nonnegative integer");
    }
    labels[i] = static_cast<int>(v);
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (j != col) keep.push_back(j);
  }
  table.values = Matrix(table.values(Eigen::all, keep));
  if (!table.header.empty()) table.header.erase(table.header.begin() + col);
  return labels;
}

}  // namespace pclda
