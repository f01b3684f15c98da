#pragma once

// Plain comma-separated tables. Numbers are written in the shortest form
// that reads back to the same double.

#include <iosfwd>
#include <string>
#include <vector>

namespace clab::csv {

std::string number(double x);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws FormatError when absent.
  std::size_t column(const std::string& name) const;
  double value(std::size_t row, const std::string& name) const;
};

void write_row(std::ostream& out, const std::vector<std::string>& cells);
/// Throws FormatError on ragged rows or an empty input.
Table read(std::istream& in);

}  // namespace clab::csv
