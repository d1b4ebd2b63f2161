#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace cohstat {

/// One table cell: an exact integer, a double (emitted with 17 significant
/// digits so text round-trips the bits), or a preformatted string (used for
/// arbitrary-precision counts, which are always exact decimal strings).
using Cell = std::variant<std::int64_t, double, std::string>;

/// %.17g rendering used everywhere a double is printed.
std::string format_double(double value);

/// Column-named table of result rows, the common output of every CLI command.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  explicit Table(std::vector<std::string> columns_);

  void push_row(std::vector<Cell> row);

  /// Header line plus one line per row; comma delimiter, '.' decimal
  /// separator, LF line endings, UTF-8.
  std::string to_csv() const;

  /// Parses CSV produced by to_csv back into string-valued cells.
  static Table from_csv(const std::string& text);
};

} // namespace cohstat
