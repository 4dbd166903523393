#pragma once

#include <string>
#include <vector>

namespace tailrisk {

// Daily closing prices; dates are ISO-8601 strings so lexicographic order is
// chronological order.
struct PriceSeries {
  std::string asset_id;
  std::vector<std::string> dates;
  std::vector<double> closes;
};

// Log returns; one element shorter than the prices that produced it.
struct ReturnSeries {
  std::string asset_id;
  std::vector<std::string> dates;
  std::vector<double> values;
};

// Reads a `date,close` CSV (header required). Throws data_error on malformed
// rows, non-positive prices, or non-increasing dates.
PriceSeries load_price_csv(const std::string& path, const std::string& asset_id);

// Restricts every series to the intersection of all date sets, order kept.
// Throws data_error if fewer than two series are given or the intersection is
// empty.
std::vector<PriceSeries> align_calendars(const std::vector<PriceSeries>& series);

// values[t] = ln(close[t+1]/close[t]); dates start at the second observation.
ReturnSeries log_returns(const PriceSeries& prices);

}  // namespace tailrisk
