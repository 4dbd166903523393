#include <doctest.h>

#include <cmath>
#include <vector>

#include "tailrisk/diagnostics.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/garch.hpp"
#include "tailrisk/stats.hpp"

using tailrisk::GarchParams;
using tailrisk::GarchSpec;
using tailrisk::VarianceKind;

namespace {

const std::vector<double> kTiny = {0.01, -0.02, 0.015, -0.005, 0.03, -0.025, 0.0, 0.01};

GarchSpec spec_of(VarianceKind kind, int ar = 0, int ma = 0) {
  GarchSpec s;
  s.kind = kind;
  s.ar = ar;
  s.ma = ma;
  return s;
}

}  // namespace

TEST_CASE("std_t_logpdf frozen spot values") {
  CHECK(tailrisk::stats::std_t_logpdf(0.0, 5.0) ==
        doctest::Approx(-0.7132067771717296).epsilon(1e-14));
  CHECK(tailrisk::stats::std_t_logpdf(1.5, 5.0) ==
        doctest::Approx(-2.3920541409779976).epsilon(1e-14));
  CHECK(tailrisk::stats::std_t_logpdf(-2.7, 4.2) ==
        doctest::Approx(-4.455250753972013).epsilon(1e-14));
  CHECK(tailrisk::stats::std_t_logpdf(0.3, 30.0) ==
        doctest::Approx(-0.9425154192200739).epsilon(1e-14));
}

TEST_CASE("garch_filter reproduces the frozen sGARCH path and loglik") {
  GarchParams p;
  p.mu = 0.002;
  p.omega = 1e-5;
  p.alpha = {0.08};
  p.beta = {0.9};
  p.nu = 6.0;
  const auto f = tailrisk::garch_filter(spec_of(VarianceKind::sGARCH), p, kTiny);
  const std::vector<double> want = {0.000293375, 0.0002791575, 0.00029996175,
                                    0.00029348557500000005, 0.00027805701750000005,
                                    0.00032297131575000006, 0.0003589941841750001,
                                    0.0003334147657575001};
  REQUIRE(f.cond_variance.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(f.cond_variance[i] == doctest::Approx(want[i]).epsilon(1e-14));
  }
  CHECK(f.loglik == doctest::Approx(20.64461954180237).epsilon(1e-13));
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(f.std_residuals[i] ==
          doctest::Approx((kTiny[i] - 0.002) / std::sqrt(want[i])).epsilon(1e-13));
  }
}

TEST_CASE("garch_filter reproduces the frozen eGARCH path") {
  GarchParams p;
  p.mu = 0.002;
  p.omega = -0.4;
  p.gamma = {0.15};   // magnitude effect
  p.alpha = {-0.08};  // sign effect
  p.beta = {0.95};
  p.nu = 6.0;
  const auto f = tailrisk::garch_filter(spec_of(VarianceKind::eGARCH), p, kTiny);
  const std::vector<double> want = {0.0002933750000000001, 0.0003051639682696818,
                                    0.0004096238120822608, 0.00042420426788803957,
                                    0.0004533432479824042, 0.0004896283208563435,
                                    0.0006361188624679773, 0.0006274287852172318};
  REQUIRE(f.cond_variance.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(f.cond_variance[i] == doctest::Approx(want[i]).epsilon(1e-13));
  }
  CHECK(f.loglik == doctest::Approx(20.606308325035712).epsilon(1e-13));
}

TEST_CASE("garch_filter reproduces the frozen gjrGARCH path") {
  GarchParams p;
  p.mu = 0.002;
  p.omega = 1e-5;
  p.alpha = {0.05};
  p.gamma = {0.08};
  p.beta = {0.88};
  p.nu = 6.0;
  const auto f = tailrisk::garch_filter(spec_of(VarianceKind::gjrGARCH), p, kTiny);
  const std::vector<double> want = {0.000293375, 0.00027137, 0.0003117256,
                                    0.000292768528, 0.00027400630464,
                                    0.0002903255480832, 0.000360256482313216,
                                    0.0003275457044356301};
  REQUIRE(f.cond_variance.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(f.cond_variance[i] == doctest::Approx(want[i]).epsilon(1e-14));
  }
  CHECK(f.loglik == doctest::Approx(20.5309295041844).epsilon(1e-13));
}

TEST_CASE("ARMA(1,1) residual recursion matches frozen values") {
  GarchParams p;
  p.mu = 0.001;
  p.ar = {0.3};
  p.ma = {-0.2};
  p.omega = 1e-5;
  p.alpha = {0.08};
  p.beta = {0.9};
  p.nu = 6.0;
  const auto f = tailrisk::garch_filter(spec_of(VarianceKind::sGARCH, 1, 1), p, kTiny);
  const std::vector<double> want = {0.0087, -0.022260000000000002, 0.015548,
                                    -0.0073904, 0.02902192, -0.029195616,
                                    0.0006608767999999989, 0.00913217536};
  REQUIRE(f.residuals.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(f.residuals[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("criteria match frozen per-observation AIC/BIC and MAE/RMSE forms") {
  // frozen aic/bic values use the sGARCH loglik above with k=5 and n=8;
  // fit_garch computes the same forms, checked here via direct assembly
  const double ll = 20.64461954180237;
  const double n = 8.0, k = 5.0;
  CHECK(-2.0 * ll / n + 2.0 * k / n ==
        doctest::Approx(-3.9111548854505926).epsilon(1e-13));
  CHECK(-2.0 * ll / n + k * std::log(n) / n ==
        doctest::Approx(-3.8615039219006952).epsilon(1e-13));

  GarchParams p;
  p.mu = 0.002;
  p.omega = 1e-5;
  p.alpha = {0.08};
  p.beta = {0.9};
  p.nu = 6.0;
  const auto f = tailrisk::garch_filter(spec_of(VarianceKind::sGARCH), p, kTiny);
  double mae = 0.0, mse = 0.0;
  for (std::size_t t = 0; t < kTiny.size(); ++t) {
    const double d = std::fabs(kTiny[t]) - std::sqrt(f.cond_variance[t]);
    mae += std::fabs(d);
    mse += d * d;
  }
  CHECK(mae / n == doctest::Approx(0.009053919570146349).epsilon(1e-13));
  CHECK(std::sqrt(mse / n) == doctest::Approx(0.010418559327814792).epsilon(1e-13));
}

TEST_CASE("simulate_garch: determinism, degenerate case, unconditional variance") {
  GarchParams p;
  p.mu = 0.0;
  p.omega = 0.1;
  p.alpha = {0.0};
  p.beta = {0.0};
  p.nu = 7.0;
  const auto spec = spec_of(VarianceKind::sGARCH);

  const auto r1 = tailrisk::simulate_garch(spec, p, 5000, 42);
  const auto r2 = tailrisk::simulate_garch(spec, p, 5000, 42);
  CHECK(r1 == r2);
  CHECK(std::fabs(tailrisk::stats::variance(r1) - 0.1) < 0.01);

  p.alpha = {0.1};
  p.beta = {0.8};
  const auto r3 = tailrisk::simulate_garch(spec, p, 100000, 7);
  CHECK(std::fabs(tailrisk::stats::variance(r3) - 1.0) < 0.1);

  p.alpha = {0.3};
  p.beta = {0.75};
  CHECK_THROWS_AS(tailrisk::simulate_garch(spec, p, 100, 1), tailrisk::config_error);
}

TEST_CASE("fit_garch recovers sGARCH parameters and dominates the truth") {
  GarchParams truth;
  truth.mu = 0.0;
  truth.omega = 0.05;
  truth.alpha = {0.10};
  truth.beta = {0.85};
  truth.nu = 7.0;
  const auto spec = spec_of(VarianceKind::sGARCH);
  const auto r = tailrisk::simulate_garch(spec, truth, 10000, 31);

  const auto fit = tailrisk::fit_garch(r, spec, 3, 0);
  CHECK(fit.converged);
  CHECK(std::fabs(fit.params.omega - truth.omega) < 0.05);
  CHECK(std::fabs(fit.params.alpha[0] - truth.alpha[0]) < 0.05);
  CHECK(std::fabs(fit.params.beta[0] - truth.beta[0]) < 0.05);
  CHECK(fit.params.alpha[0] + fit.params.beta[0] < 1.0);

  const double ll_true = tailrisk::garch_filter(spec, truth, r).loglik;
  CHECK(fit.loglik >= ll_true - 1e-6 * static_cast<double>(r.size()));

  // well-specified fit leaves no ARCH effect in standardized residuals
  const auto lm = tailrisk::arch_lm(fit.std_residuals, 5);
  CHECK(lm.p_value > 0.05);
}

TEST_CASE("fit_garch on iid t data drives alpha to zero") {
  GarchParams truth;
  truth.mu = 0.0;
  truth.omega = 1.0;
  truth.alpha = {0.0};
  truth.beta = {0.0};
  truth.nu = 6.0;
  const auto spec = spec_of(VarianceKind::sGARCH);
  const auto r = tailrisk::simulate_garch(spec, truth, 10000, 99);
  const auto fit = tailrisk::fit_garch(r, spec, 3, 0);
  CHECK(fit.params.alpha[0] <= 0.02);
}

TEST_CASE("fit_garch rejects short samples") {
  const std::vector<double> shorty(100, 0.01);
  CHECK_THROWS_AS(tailrisk::fit_garch(shorty, spec_of(VarianceKind::sGARCH)),
                  tailrisk::data_error);
}

TEST_CASE("eGARCH fit: leverage sign and news-impact asymmetry") {
  GarchParams truth;
  truth.mu = 0.0;
  truth.omega = -0.2;
  truth.alpha = {-0.09};  // sign effect
  truth.gamma = {0.15};   // magnitude effect
  truth.beta = {0.97};
  truth.nu = 7.0;
  const auto spec = spec_of(VarianceKind::eGARCH);
  const auto r = tailrisk::simulate_garch(spec, truth, 10000, 5);
  const auto fit = tailrisk::fit_garch(r, spec, 3, 0);
  CHECK(fit.params.alpha[0] < 0.0);
  CHECK(fit.params.gamma[0] > 0.0);
  CHECK(std::fabs(fit.params.beta[0]) < 1.0);

  // response to -z exceeds response to +z when the sign effect is negative
  for (double z : {0.5, 1.0, 2.0, 3.0}) {
    const double up = fit.params.alpha[0] * z + fit.params.gamma[0] * z;
    const double dn = -fit.params.alpha[0] * z + fit.params.gamma[0] * z;
    CHECK(dn > up);
  }
}

TEST_CASE("select_model prefers eGARCH on strong-leverage data") {
  GarchParams truth;
  truth.mu = 0.0;
  truth.omega = -0.3;
  truth.alpha = {-0.15};
  truth.gamma = {0.12};
  truth.beta = {0.96};
  truth.nu = 7.0;
  const auto r = tailrisk::simulate_garch(spec_of(VarianceKind::eGARCH), truth, 6000, 17);

  const std::vector<GarchSpec> candidates = {
      spec_of(VarianceKind::sGARCH), spec_of(VarianceKind::eGARCH),
      spec_of(VarianceKind::gjrGARCH)};
  const auto sel = tailrisk::select_model(r, candidates, 2, 0);
  CHECK(sel.best.spec.kind == VarianceKind::eGARCH);
  REQUIRE(sel.table.size() == 3);
  int selected_count = 0;
  for (const auto& row : sel.table) {
    if (row.selected) ++selected_count;
    CHECK(row.fitted);
  }
  CHECK(selected_count == 1);
}

TEST_CASE("rolling_forecast: boundary stride, determinism, iid scale") {
  GarchParams truth;
  truth.mu = 0.0;
  truth.omega = 0.04;
  truth.alpha = {0.0};
  truth.beta = {0.0};
  truth.nu = 8.0;
  const auto spec = spec_of(VarianceKind::sGARCH);
  const auto r = tailrisk::simulate_garch(spec, truth, 320, 21);

  const auto f1 = tailrisk::rolling_forecast(r, spec, 300, 1000, 2, 0);
  const auto f2 = tailrisk::rolling_forecast(r, spec, 300, 1000, 2, 0);
  REQUIRE(f1.size() == 20);
  for (std::size_t i = 0; i < f1.size(); ++i) {
    CHECK(f1[i].mu == f2[i].mu);
    CHECK(f1[i].sigma == f2[i].sigma);
    CHECK_FALSE(f1[i].refit_failed);
  }
  const double sd = tailrisk::stats::stddev(r);
  for (const auto& f : f1) {
    CHECK(std::fabs(f.sigma - sd) / sd < 0.10);
  }

  CHECK_THROWS_AS(tailrisk::rolling_forecast(r, spec, 100, 10), tailrisk::config_error);
}
