#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "tailrisk/errors.hpp"
#include "tailrisk/evt.hpp"
#include "tailrisk/garch.hpp"
#include "tailrisk/risk.hpp"
#include "tailrisk/rng.hpp"
#include "tailrisk/stats.hpp"

using tailrisk::CauchyParams;
using tailrisk::CopulaFamily;
using tailrisk::CopulaSpec;
using tailrisk::EvaluationResult;
using tailrisk::GngParams;
using tailrisk::MethodForecasts;
using tailrisk::PortfolioSpec;
using tailrisk::RiskEstimate;
using tailrisk::RiskLevelGrid;
using tailrisk::RiskLevels;
using tailrisk::RiskMethod;
using tailrisk::RiskTriple;
using tailrisk::RngStream;

namespace {

const std::vector<double> kTenReturns = {-0.05, 0.01, -0.02, 0.03, -0.08,
                                         0.02,  0.00, -0.01, 0.04,  -0.03};

const std::vector<double> kTiedReturns = {-0.04, -0.04, -0.04, 0.01,
                                          0.02,  0.02,  0.03,  0.05};

// Exact integral of the empirical quantile loss over (alpha, beta]; the
// empirical VaR curve is piecewise constant on ((i-1)/n, i/n].
double trimmed_tail_mean(std::vector<double> sample, double alpha,
                         double beta) {
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double acc = 0.0;
  for (std::size_t i = 1; i <= sample.size(); ++i) {
    const double lo = std::max(alpha, (static_cast<double>(i) - 1.0) / n);
    const double hi = std::min(beta, static_cast<double>(i) / n);
    if (hi > lo) acc += -sample[i - 1] * (hi - lo);
  }
  return acc / (beta - alpha);
}

GngParams symmetric_gng() {
  GngParams p;
  p.mu = 0.0;
  p.sigma = 1.0;
  p.u_lo = -1.5;
  p.xi_lo = 0.15;
  p.phi_lo = 0.06;
  p.u_hi = 1.5;
  p.xi_hi = 0.15;
  p.phi_hi = 0.06;
  return p;
}

RiskLevelGrid full_grid() {
  RiskLevelGrid grid;
  grid.alphas = {0.01, 0.025, 0.05};
  grid.rvar_pairs = {{0.01, 0.025}, {0.01, 0.05}, {0.025, 0.05}};
  return grid;
}

}  // namespace

TEST_CASE("risk_from_sample reproduces hand-computed tail measures") {
  const RiskTriple a10 = tailrisk::risk_from_sample(kTenReturns, {0.1, {}});
  CHECK(a10.var == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(a10.es == doctest::Approx(0.08).epsilon(1e-12));
  CHECK(a10.rvar == doctest::Approx(0.08).epsilon(1e-12));

  const RiskTriple a20 = tailrisk::risk_from_sample(kTenReturns, {0.2, {}});
  CHECK(a20.var == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(a20.es == doctest::Approx(0.065).epsilon(1e-12));

  const RiskTriple a25 = tailrisk::risk_from_sample(kTenReturns, {0.25, {}});
  CHECK(a25.var == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(a25.es == doctest::Approx(0.058).epsilon(1e-12));

  const RiskTriple pair = tailrisk::risk_from_sample(kTenReturns, {0.1, 0.25});
  CHECK(pair.rvar == doctest::Approx(0.04333333333333334).epsilon(1e-12));
  CHECK(pair.var == doctest::Approx(0.08).epsilon(1e-12));
  // range VaR lies between the two VaR levels
  CHECK(pair.rvar <= a10.var + 1e-15);
  CHECK(pair.rvar >= a25.var - 1e-15);

  // alpha == beta degenerates to VaR
  const RiskTriple deg = tailrisk::risk_from_sample(kTenReturns, {0.2, 0.2});
  CHECK(deg.rvar == doctest::Approx(0.05).epsilon(1e-12));

  // ties: the fractional tail weight keeps VaR == ES across nearby levels
  for (double alpha : {0.25, 0.3, 0.375}) {
    const RiskTriple t = tailrisk::risk_from_sample(kTiedReturns, {alpha, {}});
    CHECK(t.var == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(t.es == doctest::Approx(0.04).epsilon(1e-12));
  }
}

TEST_CASE("risk_from_sample rvar equals the trimmed tail mean") {
  const RiskTriple pair = tailrisk::risk_from_sample(kTenReturns, {0.1, 0.25});
  const double direct = trimmed_tail_mean(kTenReturns, 0.1, 0.25);
  CHECK(std::abs(pair.rvar - direct) < 1e-14);

  RngStream rng = RngStream::substream(42, "risk/trimmed");
  std::vector<double> sample(57);
  for (double& v : sample) v = rng.student_t_unit_variance(5.0);
  const RiskTriple r = tailrisk::risk_from_sample(sample, {0.1, 0.3});
  const double direct2 = trimmed_tail_mean(sample, 0.1, 0.3);
  const auto [lo, hi] = std::minmax_element(sample.begin(), sample.end());
  CHECK(std::abs(r.rvar - direct2) <= 2.0 / 57.0 * (*hi - *lo));
  CHECK(std::abs(r.rvar - direct2) < 1e-12);
}

TEST_CASE("risk_from_sample rejects bad inputs") {
  CHECK_THROWS_AS(tailrisk::risk_from_sample(kTenReturns, {0.05, {}}),
                  tailrisk::data_error);  // needs n >= 1/alpha
  CHECK_THROWS_AS(tailrisk::risk_from_sample({}, {0.5, {}}),
                  tailrisk::data_error);
  std::vector<double> with_nan = kTenReturns;
  with_nan[3] = std::nan("");
  CHECK_THROWS_AS(tailrisk::risk_from_sample(with_nan, {0.2, {}}),
                  tailrisk::data_error);
  CHECK_THROWS_AS(tailrisk::risk_from_sample(kTenReturns, {0.0, {}}),
                  tailrisk::config_error);
  CHECK_THROWS_AS(tailrisk::risk_from_sample(kTenReturns, {1.0, {}}),
                  tailrisk::config_error);
  CHECK_THROWS_AS(tailrisk::risk_from_sample(kTenReturns, {0.3, 0.2}),
                  tailrisk::config_error);
}

TEST_CASE("empirical tail measures approach the normal closed forms") {
  RngStream rng = RngStream::substream(42, "risk/normal");
  std::vector<double> sample(1000000);
  for (double& v : sample) v = rng.normal();

  RiskLevelGrid grid;
  grid.alphas = {0.01, 0.025, 0.05};
  grid.rvar_pairs = {{0.01, 0.05}};
  const RiskEstimate est =
      tailrisk::estimate_from_sample(sample, grid, RiskMethod::HS);

  CHECK(est.var_values[0] == doctest::Approx(2.3263478740408408).epsilon(0.01 / 2.3));
  CHECK(est.es_values[0] == doctest::Approx(2.665214220345808).epsilon(0.02 / 2.6));
  CHECK(est.var_values[1] == doctest::Approx(1.959963984540054).epsilon(0.01 / 1.9));
  CHECK(est.es_values[1] == doctest::Approx(2.337802792201413).epsilon(0.02 / 2.3));
  CHECK(est.var_values[2] == doctest::Approx(1.6448536269514722).epsilon(0.01 / 1.6));
  CHECK(est.es_values[2] == doctest::Approx(2.0627128075074253).epsilon(0.02 / 2.0));
  CHECK(est.rvar_values[0] == doctest::Approx(1.9120874542978297).epsilon(0.03 / 1.9));

  // ordering invariants
  CHECK(est.var_values[0] > est.var_values[1]);
  CHECK(est.var_values[1] > est.var_values[2]);
  for (std::size_t i = 0; i < 3; ++i) CHECK(est.es_values[i] >= est.var_values[i]);
  CHECK(est.rvar_values[0] <= est.var_values[0]);
  CHECK(est.rvar_values[0] >= est.var_values[2]);
}

TEST_CASE("parametric t risk matches reference values") {
  const RiskTriple nu5_1 = tailrisk::parametric_t_risk(0.0, 1.0, 5.0, {0.01, {}});
  CHECK(nu5_1.var == doctest::Approx(2.606463569384324).epsilon(1e-10));
  CHECK(nu5_1.es == doctest::Approx(3.448836760047853).epsilon(1e-10));

  const RiskTriple nu5_5 = tailrisk::parametric_t_risk(0.0, 1.0, 5.0, {0.05, {}});
  CHECK(nu5_5.var == doctest::Approx(1.5608497583442291).epsilon(1e-10));
  CHECK(nu5_5.es == doctest::Approx(2.2386842554615214).epsilon(1e-10));

  const RiskTriple nu7_1 = tailrisk::parametric_t_risk(0.0, 1.0, 7.0, {0.01, {}});
  CHECK(nu7_1.var == doctest::Approx(2.5337315222089596).epsilon(1e-10));
  CHECK(nu7_1.es == doctest::Approx(3.186169663348431).epsilon(1e-10));

  const RiskTriple nu7_5 = tailrisk::parametric_t_risk(0.0, 1.0, 7.0, {0.05, {}});
  CHECK(nu7_5.var == doctest::Approx(1.60121116898518).epsilon(1e-10));
  CHECK(nu7_5.es == doctest::Approx(2.193009214379368).epsilon(1e-10));

  // location / scale equivariance
  const RiskTriple moved = tailrisk::parametric_t_risk(0.001, 0.02, 5.0, {0.05, {}});
  CHECK(moved.var == doctest::Approx(-0.001 + 0.02 * 1.5608497583442291).epsilon(1e-12));
  CHECK(moved.es == doctest::Approx(-0.001 + 0.02 * 2.2386842554615214).epsilon(1e-12));

  // nu -> infinity approaches the normal closed forms
  const RiskTriple lim = tailrisk::parametric_t_risk(0.0, 1.0, 1e6, {0.01, 0.05});
  CHECK(lim.var == doctest::Approx(2.3263478740408408).epsilon(1e-3 / 2.3));
  CHECK(lim.es == doctest::Approx(2.665214220345808).epsilon(1e-3 / 2.6));
  CHECK(lim.rvar == doctest::Approx(1.9120874542978297).epsilon(2e-3 / 1.9));

  // rvar recombines the two ES levels
  const RiskTriple r15 = tailrisk::parametric_t_risk(0.0, 1.0, 5.0, {0.01, 0.05});
  const double expect =
      (0.05 * nu5_5.es - 0.01 * nu5_1.es) / 0.04;
  CHECK(r15.rvar == doctest::Approx(expect).epsilon(1e-12));
  CHECK(r15.rvar <= nu5_1.var);
  CHECK(r15.rvar >= nu5_5.var);
  CHECK(nu5_1.es >= nu5_1.var);

  CHECK_THROWS_AS(tailrisk::parametric_t_risk(0.0, 1.0, 2.0, {0.05, {}}),
                  tailrisk::config_error);
  CHECK_THROWS_AS(tailrisk::parametric_t_risk(0.0, 0.0, 5.0, {0.05, {}}),
                  tailrisk::config_error);
}

TEST_CASE("grid estimates agree with the scalar functions") {
  RngStream rng = RngStream::substream(7, "risk/grid");
  std::vector<double> sample(400);
  for (double& v : sample) v = rng.student_t_unit_variance(5.0);

  const RiskLevelGrid grid = full_grid();
  const RiskEstimate emp =
      tailrisk::estimate_from_sample(sample, grid, RiskMethod::HS);
  CHECK(emp.method == RiskMethod::HS);
  CHECK(emp.sample_size == 400);
  for (std::size_t i = 0; i < grid.alphas.size(); ++i) {
    const RiskTriple one =
        tailrisk::risk_from_sample(sample, {grid.alphas[i], {}});
    CHECK(emp.var_values[i] == one.var);
    CHECK(emp.es_values[i] == one.es);
  }
  for (std::size_t p = 0; p < grid.rvar_pairs.size(); ++p) {
    const RiskTriple one = tailrisk::risk_from_sample(
        sample, {grid.rvar_pairs[p].first, grid.rvar_pairs[p].second});
    CHECK(emp.rvar_values[p] == one.rvar);
  }
  // narrower trims from the same lower level give larger range VaR
  CHECK(emp.rvar_values[0] >= emp.rvar_values[1]);
  CHECK(emp.rvar_values[1] >= emp.rvar_values[2]);

  const RiskEstimate par =
      tailrisk::estimate_parametric_t(0.0002, 0.013, 6.0, grid);
  CHECK(par.method == RiskMethod::ParametricT);
  for (std::size_t i = 0; i < grid.alphas.size(); ++i) {
    const RiskTriple one =
        tailrisk::parametric_t_risk(0.0002, 0.013, 6.0, {grid.alphas[i], {}});
    CHECK(par.var_values[i] == one.var);
    CHECK(par.es_values[i] == one.es);
  }
  CHECK(par.rvar_values[0] >= par.rvar_values[1]);
  CHECK(par.rvar_values[1] >= par.rvar_values[2]);

  RiskLevelGrid bad = grid;
  bad.rvar_pairs.push_back({0.02, 0.05});  // 0.02 not a listed level
  CHECK_THROWS_AS(tailrisk::estimate_from_sample(sample, bad, RiskMethod::HS),
                  tailrisk::config_error);
}

TEST_CASE("var score is the pinball loss with reporting sign") {
  CHECK(tailrisk::score_var(0.5, -0.2, 0.05) == doctest::Approx(0.015).epsilon(1e-12));
  CHECK(tailrisk::score_var(-1.0, -0.2, 0.05) == doctest::Approx(1.14).epsilon(1e-12));
  CHECK(tailrisk::score_var(0.3, -0.3, 0.05) == doctest::Approx(0.0));
  CHECK_THROWS_AS(tailrisk::score_var(0.1, 0.2, 0.0), tailrisk::config_error);

  // the average pinball loss is minimized by the empirical alpha quantile
  RngStream rng = RngStream::substream(11, "risk/pinball");
  std::vector<double> sample(999);
  for (double& v : sample) v = rng.normal();
  std::vector<double> sorted = sample;
  std::sort(sorted.begin(), sorted.end());
  double best = 1e300;
  std::size_t best_idx = 0;
  for (std::size_t i = 40; i <= 60; ++i) {
    double avg = 0.0;
    for (double x : sample) avg += tailrisk::score_var(x, -sorted[i], 0.05);
    if (avg < best) {
      best = avg;
      best_idx = i;
    }
  }
  CHECK(best_idx == 49);  // ceil(0.05 * 999) = 50, 0-based 49
}

TEST_CASE("es score matches reference values and flags the clamp") {
  const auto zero = tailrisk::score_es(0.0, 0.0, 0.0, 0.05);
  CHECK(zero.value == doctest::Approx(0.05129329438755058).epsilon(1e-12));
  CHECK_FALSE(zero.clamped);

  const auto calm = tailrisk::score_es(1.0, 1.6449, 2.0627, 0.05);
  CHECK(calm.value == doctest::Approx(0.9533212992401202).epsilon(1e-12));
  CHECK_FALSE(calm.clamped);

  const auto breach = tailrisk::score_es(-3.0, 1.6449, 2.0627, 0.05);
  CHECK(breach.value == doctest::Approx(5.753364875545422).epsilon(1e-12));

  const auto huge = tailrisk::score_es(0.0, 0.0, -80.0, 0.05);
  CHECK(huge.value == doctest::Approx(2.5405057090076654e+23).epsilon(1e-12));
  CHECK(huge.clamped);
}

TEST_CASE("rvar score matches reference values and stays finite for huge arguments") {
  // forecast arguments are negated internally, so the (x,y,z,w) pins below
  // pass the sign-flipped tuples
  CHECK(tailrisk::score_rvar(0.0, 0.0, 0.0, 0.0, 0.01, 0.05) ==
        doctest::Approx(1.0100503358535013).epsilon(1e-12));
  CHECK(tailrisk::score_rvar(1.2, 2.3263, 1.6449, -1.9, 0.01, 0.05) ==
        doctest::Approx(1.1265530305744118).epsilon(1e-12));
  CHECK(tailrisk::score_rvar(-2.0, 2.3263, 1.6449, -1.9, 0.01, 0.05) ==
        doctest::Approx(1.498879476687845).epsilon(1e-12));
  CHECK(tailrisk::score_rvar(0.3, 1.0, 0.5, -1e6, 0.01, 0.05) ==
        doctest::Approx(1.7651975164171552).epsilon(1e-12));
  CHECK(tailrisk::score_rvar(0.3, 1.0, 0.5, 1e6, 0.01, 0.05) ==
        doctest::Approx(1.7111975164134299).epsilon(1e-12));
  CHECK_THROWS_AS(tailrisk::score_rvar(0.0, 0.0, 0.0, 0.0, 0.05, 0.05),
                  tailrisk::config_error);
}

TEST_CASE("es score grid minimum sits near the true var and es") {
  RngStream rng = RngStream::substream(13, "risk/esgrid");
  std::vector<double> sample(10000);
  for (double& v : sample) v = rng.normal();

  const auto avg_score = [&sample](double y, double z) {
    double avg = 0.0;
    for (double x : sample) avg += tailrisk::score_es(x, -y, -z, 0.05).value;
    return avg;
  };
  double best = 1e300;
  double best_y = 0.0, best_z = 0.0;
  for (double y = -2.10; y <= -1.20 + 1e-9; y += 0.025) {
    for (double z = -2.70; z <= -1.70 + 1e-9; z += 0.025) {
      const double avg = avg_score(y, z);
      if (avg < best) {
        best = avg;
        best_y = y;
        best_z = z;
      }
    }
  }
  CHECK(std::abs(best_y - (-1.6448536269514722)) < 0.1);
  CHECK(std::abs(best_z - (-2.0627128075074253)) < 0.1);
  // perturbing the tail-mean argument away from the minimum hurts
  CHECK(avg_score(best_y, best_z - 0.3) > best);
  CHECK(avg_score(best_y, best_z + 0.3) > best);
}

TEST_CASE("rvar score grid minimum sits near the true triple") {
  RngStream rng = RngStream::substream(17, "risk/rvargrid");
  std::vector<double> sample(10000);
  for (double& v : sample) v = rng.normal();

  double best = 1e300;
  double best_y = 0.0, best_z = 0.0, best_w = 0.0;
  for (double y = -2.60; y <= -2.00 + 1e-9; y += 0.05) {
    for (double z = -1.90; z <= -1.40 + 1e-9; z += 0.05) {
      for (double w = 1.60; w <= 2.20 + 1e-9; w += 0.05) {
        double avg = 0.0;
        for (double x : sample) {
          avg += tailrisk::score_rvar(x, -y, -z, w, 0.01, 0.05);
        }
        if (avg < best) {
          best = avg;
          best_y = y;
          best_z = z;
          best_w = w;
        }
      }
    }
  }
  CHECK(std::abs(best_y - (-2.3263478740408408)) < 0.15);
  CHECK(std::abs(best_z - (-1.6448536269514722)) < 0.15);
  CHECK(std::abs(best_w - 1.9120874542978297) < 0.15);
}

TEST_CASE("legal robustness measures relative dispersion") {
  CHECK(tailrisk::legal_robustness({1.0, 3.0}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(tailrisk::legal_robustness({2.0, 2.0, 2.0}) == doctest::Approx(0.0));
  CHECK(tailrisk::legal_robustness({0.01, 0.02, 0.03, 0.06}) ==
        doctest::Approx(0.5).epsilon(1e-14));
  // scale invariance
  CHECK(tailrisk::legal_robustness({0.07, 0.14, 0.21, 0.42}) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(tailrisk::legal_robustness({1.0}), tailrisk::data_error);
  CHECK_THROWS_AS(tailrisk::legal_robustness({-1.0, 1.0}), tailrisk::data_error);
}

TEST_CASE("min variance weights hit the closed form and clamp") {
  const auto w = tailrisk::min_variance_weights(0.04, 0.09, 0.018);
  CHECK(w.first == doctest::Approx(0.7659574468085106).epsilon(1e-14));
  CHECK(w.second == doctest::Approx(1.0 - 0.7659574468085106).epsilon(1e-13));

  const auto clamped = tailrisk::min_variance_weights(0.04, 0.09, 0.05);
  CHECK(clamped.first == doctest::Approx(1.0));
  CHECK(clamped.second == doctest::Approx(0.0));

  const auto even = tailrisk::min_variance_weights(0.02, 0.02, 0.005);
  CHECK(even.first == doctest::Approx(0.5).epsilon(1e-14));

  CHECK_THROWS_AS(tailrisk::min_variance_weights(1.0, 1.0, 1.0),
                  tailrisk::data_error);
  CHECK_THROWS_AS(tailrisk::min_variance_weights(0.0, 1.0, 0.0),
                  tailrisk::data_error);
}

TEST_CASE("min variance weights beat equal weights out of sample") {
  int wins = 0;
  for (int seed = 0; seed < 20; ++seed) {
    RngStream rng = RngStream::substream(100 + seed, "risk/minvar");
    const double rho = 0.3;
    std::vector<double> x(600), y(600);
    for (std::size_t i = 0; i < 600; ++i) {
      const double a = rng.normal();
      const double b = rng.normal();
      x[i] = 1.0 * a;
      y[i] = 2.0 * (rho * a + std::sqrt(1.0 - rho * rho) * b);
    }
    const std::vector<double> x_est(x.begin(), x.begin() + 300);
    const std::vector<double> y_est(y.begin(), y.begin() + 300);
    const double v1 = tailrisk::stats::variance(x_est);
    const double v2 = tailrisk::stats::variance(y_est);
    const double m1 = tailrisk::stats::mean(x_est);
    const double m2 = tailrisk::stats::mean(y_est);
    double cov = 0.0;
    for (std::size_t i = 0; i < 300; ++i) cov += (x_est[i] - m1) * (y_est[i] - m2);
    cov /= 299.0;
    const auto w = tailrisk::min_variance_weights(v1, v2, cov);

    std::vector<double> opt(300), even(300);
    for (std::size_t i = 0; i < 300; ++i) {
      opt[i] = w.first * x[300 + i] + w.second * y[300 + i];
      even[i] = 0.5 * x[300 + i] + 0.5 * y[300 + i];
    }
    if (tailrisk::stats::variance(opt) <= tailrisk::stats::variance(even)) ++wins;
  }
  CHECK(wins >= 18);
}

TEST_CASE("portfolio returns combine aligned legs") {
  tailrisk::ReturnSeries a;
  a.asset_id = "AAA";
  a.dates = {"2020-01-01", "2020-01-02", "2020-01-03"};
  a.values = {0.01, -0.02, 0.03};
  tailrisk::ReturnSeries b = a;
  b.asset_id = "BBB";
  b.values = {0.02, 0.04, -0.01};

  PortfolioSpec spec{"AAA", "BBB", 0.25, 0.75};
  const auto port = tailrisk::portfolio_returns(a, b, spec);
  CHECK(port.asset_id == "AAA+BBB");
  CHECK(port.dates == a.dates);
  CHECK(port.values[0] == doctest::Approx(0.25 * 0.01 + 0.75 * 0.02).epsilon(1e-15));
  CHECK(port.values[1] == doctest::Approx(0.25 * -0.02 + 0.75 * 0.04).epsilon(1e-15));

  const auto solo = tailrisk::portfolio_returns(a, b, {"AAA", "BBB", 1.0, 0.0});
  CHECK(solo.values == a.values);

  tailrisk::ReturnSeries shifted = b;
  shifted.dates[2] = "2020-01-04";
  CHECK_THROWS_AS(tailrisk::portfolio_returns(a, shifted, spec),
                  tailrisk::data_error);
  tailrisk::ReturnSeries shorter = b;
  shorter.values.pop_back();
  shorter.dates.pop_back();
  CHECK_THROWS_AS(tailrisk::portfolio_returns(a, shorter, spec),
                  tailrisk::data_error);
  CHECK_THROWS_AS(tailrisk::portfolio_returns(a, b, {"AAA", "BBB", 0.6, 0.39}),
                  tailrisk::config_error);
  CHECK_THROWS_AS(tailrisk::portfolio_returns(a, b, {"AAA", "BBB", 1.2, -0.2}),
                  tailrisk::config_error);
}

TEST_CASE("copula monte carlo risk is reproducible and ordered") {
  const tailrisk::MarginalParams m1 = symmetric_gng();
  const tailrisk::MarginalParams m2 = symmetric_gng();
  CopulaSpec frank{CopulaFamily::Frank, 3.0, 0.0};
  const PortfolioSpec spec{"X", "Y", 0.5, 0.5};
  const RiskLevelGrid grid = full_grid();

  const RiskEstimate one = tailrisk::mcs_copula_risk(
      m1, m2, frank, 0.0, 1.0, 0.0, 1.0, spec, grid, 10000, 99);
  const RiskEstimate two = tailrisk::mcs_copula_risk(
      m1, m2, frank, 0.0, 1.0, 0.0, 1.0, spec, grid, 10000, 99);
  CHECK(one.method == RiskMethod::McsFrank);
  CHECK(one.var_values == two.var_values);
  CHECK(one.es_values == two.es_values);
  CHECK(one.rvar_values == two.rvar_values);
  CHECK(one.sample_size == 10000);

  CHECK(one.var_values[0] > one.var_values[1]);
  CHECK(one.var_values[1] > one.var_values[2]);
  for (std::size_t i = 0; i < 3; ++i) CHECK(one.es_values[i] >= one.var_values[i]);
  // each pair sits between its VaR levels
  CHECK(one.rvar_values[0] <= one.var_values[0]);
  CHECK(one.rvar_values[0] >= one.var_values[1]);
  CHECK(one.rvar_values[1] <= one.var_values[0]);
  CHECK(one.rvar_values[1] >= one.var_values[2]);
  CHECK(one.rvar_values[2] <= one.var_values[1]);
  CHECK(one.rvar_values[2] >= one.var_values[2]);
  CHECK(one.rvar_values[0] >= one.rvar_values[1]);
  CHECK(one.rvar_values[1] >= one.rvar_values[2]);

  // 5000 paths cannot resolve the 1% level at 100 tail points
  CHECK_THROWS_AS(tailrisk::mcs_copula_risk(m1, m2, frank, 0.0, 1.0, 0.0, 1.0,
                                            spec, grid, 5000, 99),
                  tailrisk::config_error);

  CHECK(tailrisk::to_string(RiskMethod::McsStudentT) == "MCS-StudentT");
  CHECK(tailrisk::method_for(CopulaFamily::Joe) == RiskMethod::McsJoe);
}

TEST_CASE("joint innovation draws give common random numbers") {
  const tailrisk::MarginalParams m1 = CauchyParams{0.0, 1.0};
  const tailrisk::MarginalParams m2 = symmetric_gng();
  CopulaSpec gumbel{CopulaFamily::Gumbel, 1.7, 0.0};
  const auto a = tailrisk::joint_innovation_draws(m1, m2, gumbel, 2000, 5);
  const auto b = tailrisk::joint_innovation_draws(m1, m2, gumbel, 2000, 5);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  const auto c = tailrisk::joint_innovation_draws(m1, m2, gumbel, 2000, 6);
  CHECK(a.first != c.first);
  for (double v : a.first) CHECK(std::isfinite(v));
  for (double v : a.second) CHECK(std::isfinite(v));
}

TEST_CASE("independent legs diversify the simulated var") {
  const tailrisk::MarginalParams m = symmetric_gng();
  CopulaSpec indep{CopulaFamily::Gumbel, 1.0, 0.0};
  RiskLevelGrid grid;
  grid.alphas = {0.05};
  const RiskEstimate both = tailrisk::mcs_copula_risk(
      m, m, indep, 0.0, 1.0, 0.0, 1.0, {"X", "Y", 0.5, 0.5}, grid, 20000, 31);
  const RiskEstimate solo = tailrisk::mcs_copula_risk(
      m, m, indep, 0.0, 1.0, 0.0, 1.0, {"X", "Y", 1.0, 0.0}, grid, 20000, 31);
  CHECK(both.var_values[0] < solo.var_values[0]);
  CHECK(both.es_values[0] < solo.es_values[0]);
}

TEST_CASE("mcs estimate responds exactly to location and scale") {
  const tailrisk::MarginalParams m = symmetric_gng();
  CopulaSpec frank{CopulaFamily::Frank, 2.0, 0.0};
  const PortfolioSpec spec{"X", "Y", 0.4, 0.6};
  const RiskLevelGrid grid = full_grid();
  const RiskEstimate base = tailrisk::mcs_copula_risk(
      m, m, frank, 0.0, 1.0, 0.0, 1.0, spec, grid, 10000, 12);
  const double mu = 0.002, sigma = 0.015;
  const RiskEstimate moved = tailrisk::mcs_copula_risk(
      m, m, frank, mu, sigma, mu, sigma, spec, grid, 10000, 12);
  for (std::size_t i = 0; i < grid.alphas.size(); ++i) {
    CHECK(moved.var_values[i] ==
          doctest::Approx(sigma * base.var_values[i] - mu).epsilon(1e-10));
    CHECK(moved.es_values[i] ==
          doctest::Approx(sigma * base.es_values[i] - mu).epsilon(1e-10));
  }
  for (std::size_t p = 0; p < grid.rvar_pairs.size(); ++p) {
    CHECK(moved.rvar_values[p] ==
          doctest::Approx(sigma * base.rvar_values[p] - mu).epsilon(1e-10));
  }
}

TEST_CASE("evaluate_methods averages scores and dispersion") {
  RiskLevelGrid grid;
  grid.alphas = {0.05};

  MethodForecasts a;
  a.method = RiskMethod::HS;
  a.var_forecasts = {{0.02}};
  a.es_forecasts = {{0.025}};
  a.rvar_forecasts = {{}};
  MethodForecasts b = a;
  b.method = RiskMethod::ParametricT;
  b.var_forecasts = {{0.03}};
  b.es_forecasts = {{0.035}};

  const std::vector<double> realized = {0.01};
  const EvaluationResult res = tailrisk::evaluate_methods(realized, {a, b}, grid);
  REQUIRE(res.scores.size() == 2);
  CHECK(res.scores[0].method == RiskMethod::HS);
  CHECK(res.scores[0].var_scores[0] ==
        doctest::Approx(tailrisk::score_var(0.01, 0.02, 0.05)).epsilon(1e-15));
  CHECK(res.scores[0].es_scores[0] ==
        doctest::Approx(tailrisk::score_es(0.01, 0.02, 0.025, 0.05).value).epsilon(1e-15));
  CHECK_FALSE(res.scores[0].es_clamped);
  CHECK(res.var_lr[0] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(res.es_lr[0] == doctest::Approx(0.005 / 0.03).epsilon(1e-14));
  CHECK(res.rvar_lr.empty());

  // identical forecast paths collapse the dispersion to zero
  MethodForecasts twin = a;
  twin.method = RiskMethod::McsFrank;
  const EvaluationResult same = tailrisk::evaluate_methods(realized, {a, twin}, grid);
  CHECK(same.var_lr[0] == doctest::Approx(0.0));
  CHECK(same.scores[0].var_scores == same.scores[1].var_scores);

  // single method: scores only, no dispersion
  const EvaluationResult solo = tailrisk::evaluate_methods(realized, {a}, grid);
  CHECK(solo.var_lr.empty());

  MethodForecasts ragged = a;
  ragged.es_forecasts = {};
  CHECK_THROWS_AS(tailrisk::evaluate_methods(realized, {ragged}, grid),
                  tailrisk::data_error);
  MethodForecasts wide = a;
  wide.var_forecasts = {{0.02, 0.04}};
  CHECK_THROWS_AS(tailrisk::evaluate_methods(realized, {wide}, grid),
                  tailrisk::data_error);
  CHECK_THROWS_AS(tailrisk::evaluate_methods({}, {a}, grid), tailrisk::data_error);
}

TEST_CASE("correctly specified parametric forecasts win the var tournament") {
  tailrisk::GarchSpec spec;  // GARCH(1,1), constant mean
  tailrisk::GarchParams par;
  par.mu = 0.0;
  par.omega = 2e-6;
  par.alpha = {0.08};
  par.beta = {0.90};
  par.nu = 5.0;

  RiskLevelGrid grid;
  grid.alphas = {0.01};

  const std::size_t total = 3250;
  const std::size_t warmup = 250;
  int wins = 0;
  for (int seed = 0; seed < 10; ++seed) {
    const auto r = tailrisk::simulate_garch(spec, par, total, 9000 + seed);
    std::vector<double> realized;
    MethodForecasts correct, normal, hist;
    correct.method = RiskMethod::ParametricT;
    normal.method = RiskMethod::McsFrank;  // label only
    hist.method = RiskMethod::HS;
    for (std::size_t t = warmup; t < total; ++t) {
      const std::vector<double> prefix(r.begin(), r.begin() + t);
      const auto filtered = tailrisk::garch_filter(spec, par, prefix);
      const auto f = tailrisk::one_step_forecast(spec, par, prefix, filtered);
      const auto rt = tailrisk::parametric_t_risk(f.mu, f.sigma, 5.0, {0.01, {}});
      const auto rn = tailrisk::parametric_t_risk(f.mu, f.sigma, 1e6, {0.01, {}});
      const std::vector<double> window(r.begin() + t - warmup, r.begin() + t);
      const auto rh = tailrisk::risk_from_sample(window, {0.01, {}});
      correct.var_forecasts.push_back({rt.var});
      correct.es_forecasts.push_back({rt.es});
      correct.rvar_forecasts.push_back({});
      normal.var_forecasts.push_back({rn.var});
      normal.es_forecasts.push_back({rn.es});
      normal.rvar_forecasts.push_back({});
      hist.var_forecasts.push_back({rh.var});
      hist.es_forecasts.push_back({rh.es});
      hist.rvar_forecasts.push_back({});
      realized.push_back(r[t]);
    }
    const EvaluationResult res =
        tailrisk::evaluate_methods(realized, {correct, normal, hist}, grid);
    const double sc = res.scores[0].var_scores[0];
    if (sc < res.scores[1].var_scores[0] && sc < res.scores[2].var_scores[0]) {
      ++wins;
    }
  }
  CHECK(wins >= 8);
}
