// Writes the deterministic four-asset price panel used by the end-to-end
// tests: two series on a seven-day calendar and two on weekdays only, with
// factor-correlated innovations and clustered volatility.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "tailrisk/rng.hpp"

using tailrisk::RngStream;

namespace {

struct Date {
  int y, m, d;
};

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static const int base[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return (m == 2 && leap(y)) ? 29 : base[m - 1];
}

Date next_day(Date t) {
  if (++t.d > days_in_month(t.y, t.m)) {
    t.d = 1;
    if (++t.m > 12) {
      t.m = 1;
      ++t.y;
    }
  }
  return t;
}

std::string iso(const Date& t) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", t.y, t.m, t.d);
  return buf;
}

struct AssetDef {
  const char* id;
  bool weekdays_only;
  double p0, mu, omega, alpha, gamma, beta, lambda, nu;
};

// asymmetric GARCH state: h' = omega + (alpha + gamma*[eps<0]) eps^2 + beta h
struct AssetState {
  double price, h;
  std::vector<std::string> dates;
  std::vector<double> closes;
};

const std::vector<AssetDef> kAssets = {
    {"crypto_a", false, 7850.0, 5e-4, 1.0e-5, 0.10, 0.03, 0.85, 0.70, 5.0},
    {"crypto_b", false, 142.5, 3e-4, 1.4e-5, 0.12, 0.03, 0.82, 0.65, 5.0},
    {"index_a", true, 2980.0, 3e-4, 1.5e-6, 0.05, 0.08, 0.88, 0.60, 7.0},
    {"index_b", true, 11870.0, 2e-4, 2.0e-6, 0.06, 0.08, 0.86, 0.55, 7.0},
};

}  // namespace

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : ".";
  const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 20240501ULL;
  const int n_days = argc > 3 ? std::stoi(argv[3]) : 1250;

  std::filesystem::create_directories(out_dir);
  RngStream rng = RngStream::substream(seed, "fixture/panel");

  std::vector<AssetState> states;
  for (const auto& a : kAssets) {
    AssetState s;
    s.price = a.p0;
    s.h = a.omega / (1.0 - a.alpha - 0.5 * a.gamma - a.beta);
    states.push_back(std::move(s));
  }

  Date today{2019, 1, 1};
  int weekday = 1;  // 2019-01-01 was a Tuesday; 0 = Monday
  for (int t = 0; t < n_days; ++t) {
    const bool weekend = weekday >= 5;
    const double f = rng.normal();
    for (std::size_t i = 0; i < kAssets.size(); ++i) {
      const AssetDef& a = kAssets[i];
      // fixed draw count per day keeps the panel reproducible
      const double e = rng.student_t_unit_variance(a.nu);
      if (a.weekdays_only && weekend) continue;
      AssetState& s = states[i];
      const double z = a.lambda * f + std::sqrt(1.0 - a.lambda * a.lambda) * e;
      const double eps = std::sqrt(s.h) * z;
      const double r = a.mu + eps;
      s.price *= std::exp(r);
      const double asym = eps < 0.0 ? a.gamma : 0.0;
      s.h = a.omega + (a.alpha + asym) * eps * eps + a.beta * s.h;
      s.dates.push_back(iso(today));
      s.closes.push_back(s.price);
    }
    today = next_day(today);
    weekday = (weekday + 1) % 7;
  }

  for (std::size_t i = 0; i < kAssets.size(); ++i) {
    const auto path = std::filesystem::path(out_dir) / (std::string(kAssets[i].id) + ".csv");
    std::ofstream out(path);
    if (!out) {
      std::cerr << "cannot write " << path.string() << "\n";
      return 1;
    }
    out << "date,close\n";
    char buf[32];
    for (std::size_t k = 0; k < states[i].dates.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.8f", states[i].closes[k]);
      out << states[i].dates[k] << ',' << buf << '\n';
    }
    std::cout << kAssets[i].id << ": " << states[i].dates.size() << " rows -> "
              << path.string() << "\n";
  }
  return 0;
}
