#include "tailrisk/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tailrisk/errors.hpp"

namespace tailrisk {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

PriceSeries load_price_csv(const std::string& path, const std::string& asset_id) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open price file: " + path);

  PriceSeries out;
  out.asset_id = asset_id;
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty price file: " + path);

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string row = trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string::npos) {
      throw data_error(path + ":" + std::to_string(lineno) + ": expected date,close");
    }
    const std::string date = trim(row.substr(0, comma));
    const std::string value = trim(row.substr(comma + 1));
    double close = 0.0;
    try {
      std::size_t used = 0;
      close = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw data_error(path + ":" + std::to_string(lineno) + ": bad price '" + value + "'");
    }
    if (!(close > 0.0) || !std::isfinite(close)) {
      throw data_error(path + ":" + std::to_string(lineno) + ": non-positive price");
    }
    if (!out.dates.empty() && date <= out.dates.back()) {
      throw data_error(path + ":" + std::to_string(lineno) + ": dates not strictly increasing");
    }
    out.dates.push_back(date);
    out.closes.push_back(close);
  }
  if (out.dates.empty()) throw data_error("no observations in " + path);
  return out;
}

std::vector<PriceSeries> align_calendars(const std::vector<PriceSeries>& series) {
  if (series.size() < 2) throw data_error("align_calendars needs at least two series");
  for (const auto& s : series) {
    if (s.dates.empty()) throw data_error("empty series: " + s.asset_id);
  }

  std::set<std::string> common(series[0].dates.begin(), series[0].dates.end());
  for (std::size_t k = 1; k < series.size(); ++k) {
    std::set<std::string> keep;
    for (const auto& d : series[k].dates) {
      if (common.count(d)) keep.insert(d);
    }
    common.swap(keep);
  }
  if (common.empty()) throw data_error("calendar intersection is empty");

  std::vector<PriceSeries> out;
  out.reserve(series.size());
  for (const auto& s : series) {
    PriceSeries r;
    r.asset_id = s.asset_id;
    for (std::size_t i = 0; i < s.dates.size(); ++i) {
      if (common.count(s.dates[i])) {
        r.dates.push_back(s.dates[i]);
        r.closes.push_back(s.closes[i]);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

ReturnSeries log_returns(const PriceSeries& prices) {
  if (prices.closes.size() < 2) throw data_error("log_returns needs at least two prices");
  ReturnSeries out;
  out.asset_id = prices.asset_id;
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  out.values.reserve(prices.closes.size() - 1);
  for (std::size_t t = 1; t < prices.closes.size(); ++t) {
    if (!(prices.closes[t] > 0.0) || !(prices.closes[t - 1] > 0.0)) {
      throw data_error("non-positive price in " + prices.asset_id);
    }
    const double r = std::log(prices.closes[t] / prices.closes[t - 1]);
    if (!std::isfinite(r)) throw data_error("non-finite return in " + prices.asset_id);
    out.values.push_back(r);
  }
  return out;
}

}  // namespace tailrisk
