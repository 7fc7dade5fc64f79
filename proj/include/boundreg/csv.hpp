#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace boundreg::csv {

/// One parsed data line with its 1-based line number in the source.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> cells;
};

/// Splits on commas and trims surrounding whitespace. No quoting.
std::vector<std::string> split(std::string_view line);

/// Reads all non-blank lines. Lines starting with '#' are returned in
/// `comments` (without the '#') when they precede the header.
struct Document {
  std::vector<std::string> comments;
  Row header;
  std::vector<Row> rows;
};
Document read(std::istream& in);

/// Strict double parse of a whole cell; throws InputError naming `where`.
double parse_double(std::string_view cell, const std::string& where);
long parse_long(std::string_view cell, const std::string& where);

/// Shortest round-trip representation.
std::string format_double(double value);

} // namespace boundreg::csv
