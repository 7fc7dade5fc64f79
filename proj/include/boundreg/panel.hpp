#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "boundreg/types.hpp"

namespace boundreg {

/// N instruments x (M+1) dated observations. Column 0 is the most recent
/// date t_0; dates are strictly decreasing along the columns.
class TimeSeriesPanel {
 public:
  TimeSeriesPanel(std::vector<std::string> ids, std::vector<std::string> dates, MatrixXd values);

  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::string>& dates() const { return dates_; }
  const MatrixXd& values() const { return values_; }
  Index instruments() const { return values_.rows(); }
  /// M, the number of observations beyond t_0.
  Index history() const { return values_.cols() - 1; }
  /// Observation at t_0 for every instrument.
  VectorXd latest() const { return values_.col(0); }

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> dates_;
  MatrixXd values_;
};

/// Open, split/dividend-adjusted close and volume on a common grid of
/// instruments x dates, newest date first. All entries strictly positive.
class PricePanel {
 public:
  PricePanel(std::vector<std::string> ids, std::vector<std::string> dates, MatrixXd open, MatrixXd close_adj,
             MatrixXd volume);
  PricePanel(const TimeSeriesPanel& open, const TimeSeriesPanel& close_adj, const TimeSeriesPanel& volume);

  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::string>& dates() const { return dates_; }
  const MatrixXd& open() const { return open_; }
  const MatrixXd& close_adj() const { return close_adj_; }
  const MatrixXd& volume() const { return volume_; }
  Index instruments() const { return open_.rows(); }
  Index days() const { return open_.cols(); }

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> dates_;
  MatrixXd open_;
  MatrixXd close_adj_;
  MatrixXd volume_;
};

struct UniverseSelection {
  std::vector<Index> member_indices;  // ranked by ADDV, largest first
  VectorXd addv;
  int rebalance_period = 21;
  bool truncated = false;  // top_n exceeded N; every instrument selected
};

/// Parses the panel CSV format: line 1 `# order=newest-first` or
/// `# order=oldest-first`, then `id,<date>,...` and one row per instrument.
TimeSeriesPanel load_panel(std::istream& in);
TimeSeriesPanel load_panel_file(const std::string& path);

/// Writes the panel newest-first in the format load_panel reads.
void serialize_panel(const TimeSeriesPanel& panel, std::ostream& out);

/// Mean of close_adj * volume over the `window` dates strictly older than
/// column `as_of`. as_of = -1 evaluates after the newest date, i.e. over
/// columns 0 .. window-1.
VectorXd compute_addv(const PricePanel& prices, int window, Index as_of = -1);

/// Indices of the top_n largest ADDV values; ties go to the lower index.
UniverseSelection select_universe(const VectorXd& addv, int top_n, int rebalance_period = 21);

} // namespace boundreg
