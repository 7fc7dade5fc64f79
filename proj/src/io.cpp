#include "boundreg/io.hpp"

#include <fstream>
#include <ostream>
#include <unordered_map>

#include "boundreg/csv.hpp"
#include "boundreg/errors.hpp"

namespace boundreg::io {

IdTable read_id_table(std::istream& in, const std::string& what) {
  const auto doc = csv::read(in);
  const auto& header = doc.header.cells;
  if (header.empty() || header[0] != "id") throw InputError(what + ": header must start with 'id'");
  IdTable t;
  t.columns.assign(header.begin() + 1, header.end());
  for (const auto& row : doc.rows) {
    if (row.cells.size() != header.size())
      throw InputError(what + ": line " + std::to_string(row.line) + " has " + std::to_string(row.cells.size()) +
                       " fields, expected " + std::to_string(header.size()));
    t.ids.push_back(row.cells[0]);
    t.cells.emplace_back(row.cells.begin() + 1, row.cells.end());
    t.lines.push_back(row.line);
  }
  return t;
}

IdTable read_id_table_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + what + " '" + path + "'");
  return read_id_table(in, what);
}

std::vector<std::size_t> align(const IdTable& table, std::span<const std::string> ids, const std::string& what) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < table.ids.size(); ++r) {
    if (!row_of.emplace(table.ids[r], r).second)
      throw InputError(what + ": duplicate id '" + table.ids[r] + "'");
  }
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = row_of.find(id);
    if (it == row_of.end()) throw InputError(what + ": no row for id '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

namespace {

std::size_t column_index(const IdTable& table, const std::string& column, const std::string& what) {
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    if (table.columns[c] == column) return c;
  throw InputError(what + ": missing column '" + column + "'");
}

std::string where(const IdTable& table, std::size_t row, const std::string& column, const std::string& what) {
  return what + " line " + std::to_string(table.lines[row]) + ", column '" + column + "'";
}

} // namespace

VectorXd read_column(const IdTable& table, std::span<const std::string> ids, const std::string& column,
                     const std::string& what) {
  const auto c = column_index(table, column, what);
  const auto rows = align(table, ids, what);
  VectorXd out(static_cast<Index>(ids.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    out(static_cast<Index>(i)) = csv::parse_double(table.cells[rows[i]][c], where(table, rows[i], column, what));
  return out;
}

BoundSpec<double> read_bounds(const IdTable& table, std::span<const std::string> ids) {
  VectorXd lower = read_column(table, ids, "lower", "bounds file");
  VectorXd upper = read_column(table, ids, "upper", "bounds file");
  for (Index i = 0; i < lower.size(); ++i) {
    if (lower(i) > 0.0 || upper(i) < 0.0)
      throw InputError("bounds file: bounds for '" + ids[static_cast<std::size_t>(i)] + "' do not straddle zero");
  }
  return BoundSpec<double>(std::move(lower), std::move(upper));
}

std::vector<std::string> read_classification(const IdTable& table, std::span<const std::string> ids) {
  const auto c = column_index(table, "label", "classification file");
  const auto rows = align(table, ids, "classification file");
  std::vector<std::string> labels;
  for (std::size_t r : rows) {
    if (table.cells[r][c].empty())
      throw InputError("classification file: empty label for '" + table.ids[r] + "'");
    labels.push_back(table.cells[r][c]);
  }
  return labels;
}

MatrixXd read_styles(const IdTable& table, std::span<const std::string> ids) {
  if (table.columns.empty()) throw InputError("style file has no style columns");
  const auto rows = align(table, ids, "style file");
  MatrixXd out(static_cast<Index>(ids.size()), static_cast<Index>(table.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      out(static_cast<Index>(i), static_cast<Index>(c)) =
          csv::parse_double(table.cells[rows[i]][c], where(table, rows[i], table.columns[c], "style file"));
  return out;
}

BoundOverrides read_overrides(const IdTable& table, std::span<const std::string> ids) {
  const auto lc = column_index(table, "lower_override", "overrides file");
  const auto uc = column_index(table, "upper_override", "overrides file");
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < table.ids.size(); ++r)
    if (!row_of.emplace(table.ids[r], r).second)
      throw InputError("overrides file: duplicate id '" + table.ids[r] + "'");
  BoundOverrides out;
  out.lower.resize(ids.size());
  out.upper.resize(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto it = row_of.find(ids[i]);
    if (it == row_of.end()) continue;
    const auto& cells = table.cells[it->second];
    if (!cells[lc].empty())
      out.lower[i] = csv::parse_double(cells[lc], where(table, it->second, "lower_override", "overrides file"));
    if (!cells[uc].empty())
      out.upper[i] = csv::parse_double(cells[uc], where(table, it->second, "upper_override", "overrides file"));
  }
  return out;
}

KeyValues read_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("config line " + std::to_string(number) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InputError("config line " + std::to_string(number) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

KeyValues read_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  return read_key_values(in);
}

double kv_double(const KeyValues& kv, const std::string& key, double fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : csv::parse_double(it->second, "config key '" + key + "'");
}

int kv_int(const KeyValues& kv, const std::string& key, int fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : static_cast<int>(csv::parse_long(it->second, "config key '" + key + "'"));
}

void apply_solver_config(const KeyValues& kv, SolverConfig& config, std::vector<std::string>* consumed) {
  config.tol = kv_double(kv, "tol", config.tol);
  config.prec = kv_double(kv, "prec", config.prec);
  config.max_inner = kv_int(kv, "max_inner", config.max_inner);
  config.max_outer = kv_int(kv, "max_outer", config.max_outer);
  config.validate();
  if (consumed) consumed->insert(consumed->end(), {"tol", "prec", "max_inner", "max_outer"});
}

void write_vector(std::ostream& out, std::span<const std::string> ids, const VectorXd& values, const std::string& name) {
  out << "id," << name << '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << ',' << csv::format_double(values(static_cast<Index>(i))) << '\n';
}

} // namespace boundreg::io
