#include "boundreg/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "boundreg/csv.hpp"
#include "boundreg/errors.hpp"
#include "boundreg/io.hpp"

namespace boundreg {

namespace {

std::chrono::sys_days parse_date(const std::string& iso) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (std::sscanf(iso.c_str(), "%d-%u-%u", &y, &m, &d) != 3) throw InputError("bad start date '" + iso + "'");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw InputError("bad start date '" + iso + "'");
  return std::chrono::sys_days{ymd};
}

std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

/// Weekdays from `start` onwards, oldest first.
std::vector<std::string> business_days(const std::string& start, int count) {
  std::vector<std::string> out;
  auto day = parse_date(start);
  while (static_cast<int>(out.size()) < count) {
    const std::chrono::weekday wd{day};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.push_back(format_date(day));
    day += std::chrono::days{1};
  }
  return out;
}

} // namespace

SyntheticMarket generate_synthetic(const SyntheticConfig& config) {
  if (config.instruments < 1 || config.days < 2) throw InputError("synthetic market needs N >= 1 and at least 2 days");
  if (!(config.gap_sigma > 0.0) || !(config.addv > 0.0) || config.intraday_noise < 0.0 || config.categories < 1)
    throw InputError("synthetic market parameters out of range");
  const int n = config.instruments;
  const int d = config.days;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.5, 1.5);

  VectorXd sigma(n), dollar_volume(n), start_price(n);
  for (int i = 0; i < n; ++i) {
    sigma(i) = config.gap_sigma * uni(rng);
    dollar_volume(i) = config.addv * uni(rng);
    start_price(i) = 50.0 * std::exp(0.3 * normal(rng));
  }

  // Columns are filled oldest first and reversed at the end.
  MatrixXd open(n, d), close(n, d), volume(n, d);
  for (int i = 0; i < n; ++i) {
    double prev_close = start_price(i);
    for (int t = 0; t < d; ++t) {
      const double gap = sigma(i) * normal(rng);
      const double noise = config.intraday_noise * normal(rng);
      open(i, t) = prev_close * std::exp(gap);
      close(i, t) = open(i, t) * std::exp(-config.reversion * gap + noise);
      volume(i, t) = dollar_volume(i) * std::exp(0.2 * normal(rng)) / close(i, t);
      prev_close = close(i, t);
    }
  }

  std::vector<std::string> ids, labels;
  MatrixXd styles(n, 1);
  for (int i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%03d", i);
    ids.emplace_back(buf);
    labels.push_back("c" + std::to_string(i % config.categories));
    styles(i, 0) = normal(rng);
  }
  auto dates = business_days(config.start_date, d);
  std::reverse(dates.begin(), dates.end());
  return {PricePanel(std::move(ids), std::move(dates), open.rowwise().reverse(), close.rowwise().reverse(),
                     volume.rowwise().reverse()),
          std::move(labels), std::move(styles)};
}

void write_market(const SyntheticMarket& market, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const auto& p = market.prices;
  auto write_panel = [&](const MatrixXd& values, const char* name) {
    std::ofstream out(fs::path(directory) / name);
    if (!out) throw InputError("cannot write '" + (fs::path(directory) / name).string() + "'");
    serialize_panel(TimeSeriesPanel(p.ids(), p.dates(), values), out);
  };
  write_panel(p.open(), "open.csv");
  write_panel(p.close_adj(), "close_adj.csv");
  write_panel(p.volume(), "volume.csv");
  {
    std::ofstream out(fs::path(directory) / "classification.csv");
    out << "id,label\n";
    for (std::size_t i = 0; i < p.ids().size(); ++i) out << p.ids()[i] << ',' << market.labels[i] << '\n';
  }
  {
    std::ofstream out(fs::path(directory) / "styles.csv");
    out << "id";
    for (Index s = 0; s < market.styles.cols(); ++s) out << ",style" << s + 1;
    out << '\n';
    for (std::size_t i = 0; i < p.ids().size(); ++i) {
      out << p.ids()[i];
      for (Index s = 0; s < market.styles.cols(); ++s)
        out << ',' << csv::format_double(market.styles(static_cast<Index>(i), s));
      out << '\n';
    }
  }
}

MarketFiles read_market(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) throw InputError("data directory '" + directory + "' does not exist");
  for (const char* name : {"open.csv", "close_adj.csv", "volume.csv"})
    if (!fs::exists(fs::path(directory) / name))
      throw InputError("data directory '" + directory + "' is missing " + name);
  const auto open = load_panel_file((fs::path(directory) / "open.csv").string());
  const auto close = load_panel_file((fs::path(directory) / "close_adj.csv").string());
  const auto volume = load_panel_file((fs::path(directory) / "volume.csv").string());
  MarketFiles out{PricePanel(open, close, volume), {}, {}};
  const auto& ids = out.prices.ids();
  if (fs::exists(fs::path(directory) / "classification.csv"))
    out.labels = io::read_classification(
        io::read_id_table_file((fs::path(directory) / "classification.csv").string(), "classification file"), ids);
  if (fs::exists(fs::path(directory) / "styles.csv"))
    out.styles = io::read_styles(io::read_id_table_file((fs::path(directory) / "styles.csv").string(), "style file"), ids);
  return out;
}

} // namespace boundreg
