#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boundreg/bounded_regression.hpp"
#include "boundreg/types.hpp"

namespace boundreg::io {

/// `id,<col1>,...` table. Cells are kept as text until aligned.
struct IdTable {
  std::vector<std::string> columns;  // header without the leading "id"
  std::vector<std::string> ids;
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> lines;
};

IdTable read_id_table(std::istream& in, const std::string& what);
IdTable read_id_table_file(const std::string& path, const std::string& what);

/// Row index in `table` for each of `ids`; every id must be present exactly once.
std::vector<std::size_t> align(const IdTable& table, std::span<const std::string> ids, const std::string& what);

/// Numeric column `column` of an `id,...` table, ordered like `ids`.
VectorXd read_column(const IdTable& table, std::span<const std::string> ids, const std::string& column,
                     const std::string& what);

/// Bounds file `id,lower,upper`.
BoundSpec<double> read_bounds(const IdTable& table, std::span<const std::string> ids);

/// Classification file `id,label`.
std::vector<std::string> read_classification(const IdTable& table, std::span<const std::string> ids);

/// Style file `id,<style1>,...,<styleS>`, ordered like `ids`.
MatrixXd read_styles(const IdTable& table, std::span<const std::string> ids);

/// Overrides file `id,lower_override,upper_override` in dollars; empty field
/// means no override. Ids absent from the file get no override.
struct BoundOverrides {
  std::vector<std::optional<double>> lower;
  std::vector<std::optional<double>> upper;
};
BoundOverrides read_overrides(const IdTable& table, std::span<const std::string> ids);

/// `key = value` lines; '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;
KeyValues read_key_values(std::istream& in);
KeyValues read_key_values_file(const std::string& path);

/// Applies tol, prec, max_inner, max_outer. Other keys are left for the
/// caller; `consumed` collects the keys this function used.
void apply_solver_config(const KeyValues& kv, SolverConfig& config, std::vector<std::string>* consumed = nullptr);

double kv_double(const KeyValues& kv, const std::string& key, double fallback);
int kv_int(const KeyValues& kv, const std::string& key, int fallback);

/// `id,<name>` CSV with one row per id.
void write_vector(std::ostream& out, std::span<const std::string> ids, const VectorXd& values,
                  const std::string& name);

} // namespace boundreg::io
