#include "boundreg/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "boundreg/csv.hpp"
#include "boundreg/errors.hpp"

namespace boundreg {

namespace {

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9') return false;
  return true;
}

void check_ids_dates(const std::vector<std::string>& ids, const std::vector<std::string>& dates, Index rows,
                     Index cols) {
  if (rows < 1) throw InputError("panel needs at least one instrument");
  if (cols < 1) throw InputError("panel needs at least one date");
  if (static_cast<Index>(ids.size()) != rows || static_cast<Index>(dates.size()) != cols)
    throw InputError("panel labels do not match the value matrix shape");
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (id.empty()) throw InputError("empty instrument id");
    if (!seen.insert(id).second) throw InputError("duplicate instrument id '" + id + "'");
  }
  for (std::size_t j = 0; j < dates.size(); ++j) {
    if (!is_iso_date(dates[j])) throw InputError("'" + dates[j] + "' is not an ISO date (YYYY-MM-DD)");
    if (j > 0 && !(dates[j] < dates[j - 1]))
      throw InputError("dates are not strictly ordered newest-first at '" + dates[j] + "'");
  }
}

} // namespace

TimeSeriesPanel::TimeSeriesPanel(std::vector<std::string> ids, std::vector<std::string> dates, MatrixXd values)
    : ids_(std::move(ids)), dates_(std::move(dates)), values_(std::move(values)) {
  check_ids_dates(ids_, dates_, values_.rows(), values_.cols());
  if (!values_.allFinite()) throw InputError("panel contains non-finite values");
}

PricePanel::PricePanel(std::vector<std::string> ids, std::vector<std::string> dates, MatrixXd open,
                       MatrixXd close_adj, MatrixXd volume)
    : ids_(std::move(ids)),
      dates_(std::move(dates)),
      open_(std::move(open)),
      close_adj_(std::move(close_adj)),
      volume_(std::move(volume)) {
  check_ids_dates(ids_, dates_, open_.rows(), open_.cols());
  auto check = [&](const MatrixXd& m, const char* name) {
    if (m.rows() != open_.rows() || m.cols() != open_.cols())
      throw InputError(std::string(name) + " panel shape differs from open");
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j)
        if (!(m(i, j) > 0.0) || !std::isfinite(m(i, j)))
          throw InputError(std::string(name) + " for '" + ids_[static_cast<std::size_t>(i)] + "' on " +
                           dates_[static_cast<std::size_t>(j)] + " is not strictly positive");
  };
  check(open_, "open");
  check(close_adj_, "close_adj");
  check(volume_, "volume");
}

PricePanel::PricePanel(const TimeSeriesPanel& open, const TimeSeriesPanel& close_adj, const TimeSeriesPanel& volume)
    : PricePanel(open.ids(), open.dates(), open.values(), close_adj.values(), volume.values()) {
  if (close_adj.ids() != open.ids() || volume.ids() != open.ids())
    throw InputError("price panels list different instruments");
  if (close_adj.dates() != open.dates() || volume.dates() != open.dates())
    throw InputError("price panels cover different dates");
}

TimeSeriesPanel load_panel(std::istream& in) {
  const auto doc = csv::read(in);
  if (doc.comments.empty()) throw InputError("panel file must start with '# order=newest-first' or '# order=oldest-first'");
  bool newest_first = true;
  const std::string& flag = doc.comments.front();
  if (flag == "order=newest-first") newest_first = true;
  else if (flag == "order=oldest-first") newest_first = false;
  else throw InputError("unrecognized panel order flag '# " + flag + "'");

  const auto& header = doc.header.cells;
  if (header.size() < 2 || header[0] != "id") throw InputError("panel header must be 'id,<date>,...'");
  const std::size_t cols = header.size() - 1;
  std::vector<std::string> dates(header.begin() + 1, header.end());
  std::vector<std::string> ids;
  MatrixXd values(static_cast<Index>(doc.rows.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& row = doc.rows[r];
    if (row.cells.size() != header.size())
      throw InputError("line " + std::to_string(row.line) + " has " + std::to_string(row.cells.size()) +
                       " fields, header has " + std::to_string(header.size()));
    ids.push_back(row.cells[0]);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string where = "line " + std::to_string(row.line) + ", column '" + dates[c] + "' (id '" +
                                row.cells[0] + "')";
      values(static_cast<Index>(r), static_cast<Index>(c)) = csv::parse_double(row.cells[c + 1], where);
    }
  }
  if (!newest_first) {
    std::reverse(dates.begin(), dates.end());
    values = values.rowwise().reverse().eval();
  }
  return TimeSeriesPanel(std::move(ids), std::move(dates), std::move(values));
}

TimeSeriesPanel load_panel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open panel file '" + path + "'");
  return load_panel(in);
}

void serialize_panel(const TimeSeriesPanel& panel, std::ostream& out) {
  out << "# order=newest-first\nid";
  for (const auto& d : panel.dates()) out << ',' << d;
  out << '\n';
  for (Index i = 0; i < panel.instruments(); ++i) {
    out << panel.ids()[static_cast<std::size_t>(i)];
    for (Index j = 0; j < panel.values().cols(); ++j) out << ',' << csv::format_double(panel.values()(i, j));
    out << '\n';
  }
}

VectorXd compute_addv(const PricePanel& prices, int window, Index as_of) {
  if (window < 1) throw InputError("ADDV window must be at least 1 day");
  if (as_of < -1) throw InputError("ADDV evaluation column out of range");
  const Index first = as_of + 1;
  if (first + window > prices.days())
    throw InputError("insufficient history for a " + std::to_string(window) + "-day ADDV window");
  const auto dollar = prices.close_adj().middleCols(first, window).cwiseProduct(prices.volume().middleCols(first, window));
  return dollar.rowwise().mean();
}

UniverseSelection select_universe(const VectorXd& addv, int top_n, int rebalance_period) {
  if (top_n < 1) throw InputError("universe size must be at least 1");
  if (rebalance_period < 1) throw InputError("rebalance period must be at least 1 day");
  for (Index i = 0; i < addv.size(); ++i)
    if (!(addv(i) >= 0.0)) throw InputError("ADDV must be non-negative");
  std::vector<Index> order(static_cast<std::size_t>(addv.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return addv(a) > addv(b); });
  UniverseSelection sel;
  sel.truncated = top_n > addv.size();
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(top_n)));
  sel.member_indices = std::move(order);
  sel.addv = addv;
  sel.rebalance_period = rebalance_period;
  return sel;
}

} // namespace boundreg
