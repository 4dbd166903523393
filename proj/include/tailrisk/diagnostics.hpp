#pragma once

#include <optional>
#include <vector>

namespace tailrisk {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

struct MomentSummary {
  double mean = 0.0;
  double stddev = 0.0;
  double skewness = 0.0;   // m3 / m2^1.5, biased central moments
  double kurtosis = 0.0;   // m4 / m2^2, non-excess (normal -> 3)
  double min = 0.0;
  double max = 0.0;
};

struct RankCorrelations {
  double spearman = 0.0;
  double kendall = 0.0;
};

// Sample std uses the n-1 denominator; skew/kurt use biased central moments.
MomentSummary summary_stats(const std::vector<double>& x);

// JB = n/6 (S^2 + (K-3)^2/4), p from chi-square(2). Needs n >= 8.
TestResult jarque_bera(const std::vector<double>& x);

// Augmented Dickey-Fuller with intercept; default lag by the Schwert rule
// floor(12 (n/100)^{1/4}). Needs n > 20.
TestResult adf_test(const std::vector<double>& x, std::optional<int> lags = {});

// Phillips-Perron Z-tau with intercept; Newey-West Bartlett bandwidth
// floor(4 (T/100)^{2/9}) on the T = n-1 regression residuals.
TestResult pp_test(const std::vector<double>& x);

// LM = rows * R^2 from regressing squared residuals on `lags` of themselves
// (rows = n - lags); constant squares degenerate to statistic 0, p = 1.
TestResult arch_lm(const std::vector<double>& residuals, int lags);

// Q = n(n+2) sum_k r_k^2/(n-k) with biased autocorrelations.
TestResult ljung_box(const std::vector<double>& x, int lags);

// Spearman rho on average ranks, Kendall tau-b with tie correction.
RankCorrelations rank_correlations(const std::vector<double>& a,
                                   const std::vector<double>& b);

// Dickey-Fuller p-value surface (intercept case) shared by adf_test/pp_test.
double mackinnon_p_value(double tau);

}  // namespace tailrisk
