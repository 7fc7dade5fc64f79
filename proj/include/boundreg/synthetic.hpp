#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "boundreg/panel.hpp"
#include "boundreg/types.hpp"

namespace boundreg {

/// Seeded synthetic market: opens gap away from the prior close by
/// g ~ N(0, sigma_i^2) and the close reverts a fraction `reversion` of the
/// gap, plus intraday noise. reversion = 1 with zero noise closes exactly at
/// the prior close.
struct SyntheticConfig {
  int instruments = 5;
  int days = 100;
  double gap_sigma = 0.01;       // cross-sectional mean of sigma_i
  double reversion = 1.0;
  double intraday_noise = 0.0;   // stdev of the log open-to-close noise
  double addv = 6e8;             // typical dollar volume per day
  int categories = 2;
  std::uint64_t seed = 1;
  std::string start_date = "2020-01-01";
};

struct SyntheticMarket {
  PricePanel prices;
  std::vector<std::string> labels;  // round-robin categories
  MatrixXd styles;                  // N x 1 random style column
};

SyntheticMarket generate_synthetic(const SyntheticConfig& config);

/// Writes open.csv, close_adj.csv, volume.csv, classification.csv and
/// styles.csv into `directory`.
void write_market(const SyntheticMarket& market, const std::string& directory);

/// Reads the files written by write_market; classification.csv and
/// styles.csv are optional.
struct MarketFiles {
  PricePanel prices;
  std::vector<std::string> labels;
  MatrixXd styles;
};
MarketFiles read_market(const std::string& directory);

} // namespace boundreg
