#include "boundreg/csv.hpp"

#include <charconv>
#include <cstdio>

#include "boundreg/errors.hpp"

namespace boundreg::csv {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

} // namespace

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Document read(std::istream& in) {
  Document doc;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (!have_header) doc.comments.emplace_back(trim(t.substr(1)));
      continue;
    }
    Row row{number, split(t)};
    if (!have_header) {
      doc.header = std::move(row);
      have_header = true;
    } else {
      doc.rows.push_back(std::move(row));
    }
  }
  if (!have_header) throw InputError("CSV input has no header row");
  return doc;
}

double parse_double(std::string_view cell, const std::string& where) {
  if (cell.empty()) throw InputError("missing value at " + where);
  double value = 0.0;
  const char* begin = cell.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw InputError("cannot parse '" + std::string(cell) + "' as a number at " + where);
  return value;
}

long parse_long(std::string_view cell, const std::string& where) {
  if (cell.empty()) throw InputError("missing value at " + where);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw InputError("cannot parse '" + std::string(cell) + "' as an integer at " + where);
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

} // namespace boundreg::csv
