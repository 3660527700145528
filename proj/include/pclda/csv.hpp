#pragma once

// Numeric CSV reading and writing. Comma separated, '.' decimal point;
// a header row is detected when any field of the first line is not a number.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pclda/numerics.hpp"

namespace pclda {

struct CsvTable {
  Matrix values;
  std::vector<std::string> header;  // empty when the file has no header row
};

/// Throws FormatError naming `source` and the 1-based line on bad input.
CsvTable parse_csv(std::istream& in, const std::string& source);
CsvTable read_csv(const std::string& path);

/// Shortest round-trip-exact rendering with 17 significant digits.
std::string format_double(double value);

/// Strict parse of a full field; returns nullopt if `text` is not a number.
std::optional<double> parse_double(std::string_view text);

void write_csv(std::ostream& out, const Matrix& values,
               const std::vector<std::string>& header = {});
void write_csv(const std::string& path, const Matrix& values,
               const std::vector<std::string>& header = {});

/// Integer labels, one per line; an optional non-numeric first line is skipped.
std::vector<int> read_labels(const std::string& path);

/// Splits column `col` (0-based) off `table` as integer labels.
std::vector<int> take_label_column(CsvTable& table, Eigen::Index col, const std::string& source);

}  // namespace pclda
