#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tailrisk {

enum class VarianceKind { sGARCH, eGARCH, gjrGARCH };

std::string to_string(VarianceKind kind);
VarianceKind variance_kind_from_string(const std::string& name);

struct GarchSpec {
  VarianceKind kind = VarianceKind::sGARCH;
  int ar = 0;          // AR order, <= 8
  int ma = 0;          // MA order, <= 8
  int arch_order = 1;  // lags of eps^2 (alpha count), >= 1
  int garch_lags = 1;  // lags of h (beta count), >= 1
};

// For eGARCH, alpha holds the signed ("sign effect") coefficients and gamma
// the magnitude coefficients, mirroring the usual reporting labels; the
// variance recursion runs in log h. For gjrGARCH, gamma is the leverage term
// on negative shocks. Both are empty for kinds that do not use them.
struct GarchParams {
  double mu = 0.0;
  std::vector<double> ar;
  std::vector<double> ma;
  double omega = 0.0;
  std::vector<double> alpha;
  std::vector<double> gamma;
  std::vector<double> beta;
  double nu = 8.0;  // Student-t degrees of freedom, > 2
};

struct GarchCriteria {
  double aic = 0.0;   // -2 loglik/n + 2k/n
  double bic = 0.0;   // -2 loglik/n + k ln(n)/n
  double mae = 0.0;   // mean |  |r_t| - sqrt(h_t) |
  double rmse = 0.0;
};

struct GarchFit {
  GarchSpec spec;
  GarchParams params;
  std::vector<double> cond_variance;
  std::vector<double> std_residuals;
  double loglik = 0.0;
  GarchCriteria criteria;
  bool converged = false;
};

struct FilterOutput {
  std::vector<double> residuals;      // eps_t from the ARMA pass
  std::vector<double> cond_variance;  // h_t
  std::vector<double> std_residuals;  // z_t = eps_t / sqrt(h_t)
  double loglik = 0.0;
};

struct VolForecast {
  double mu = 0.0;
  double sigma = 0.0;
  double nu = 0.0;            // innovation dof behind this step's parameters
  bool refit_failed = false;  // previous parameters carried forward
};

// Runs the ARMA mean recursion (presample r -> mu, eps -> 0) and the variance
// recursion seeded with h0 = mean(eps^2); returns the Student-t loglik.
FilterOutput garch_filter(const GarchSpec& spec, const GarchParams& params,
                          const std::vector<double>& returns);

// One-step-ahead (mu, sigma) continuation of a filtered sample.
VolForecast one_step_forecast(const GarchSpec& spec, const GarchParams& params,
                              const std::vector<double>& returns,
                              const FilterOutput& filtered);

// Stationarity of the variance recursion (and the AR polynomial if any).
bool params_stationary(const GarchSpec& spec, const GarchParams& params);

// Simulates n observations after a burn-in of 1000; deterministic per seed.
std::vector<double> simulate_garch(const GarchSpec& spec,
                                   const GarchParams& params, std::size_t n,
                                   std::uint64_t seed);

// MLE with `restarts` randomized starts (first start is moment-based).
// Throws numeric_error when every start fails to produce a finite optimum.
GarchFit fit_garch(const std::vector<double>& returns, const GarchSpec& spec,
                   int restarts = 5, std::uint64_t seed = 0);

struct SelectionRow {
  GarchSpec spec;
  GarchCriteria criteria;
  double loglik = 0.0;
  bool fitted = false;
  bool selected = false;
};

struct SelectionResult {
  GarchFit best;
  std::vector<SelectionRow> table;
};

// Fits every candidate; picks argmin AIC, ties by BIC then RMSE then input
// order. Throws numeric_error if all candidates fail.
SelectionResult select_model(const std::vector<double>& returns,
                             const std::vector<GarchSpec>& candidates,
                             int restarts = 5, std::uint64_t seed = 0);

// One-step-ahead forecasts for indices [window, n); parameters refit every
// refit_stride steps on the trailing window, filtered forward in between.
std::vector<VolForecast> rolling_forecast(const std::vector<double>& returns,
                                          const GarchSpec& spec,
                                          std::size_t window,
                                          std::size_t refit_stride,
                                          int restarts = 5,
                                          std::uint64_t seed = 0);

}  // namespace tailrisk
