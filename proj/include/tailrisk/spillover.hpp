#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tailrisk/series.hpp"

namespace tailrisk {

// VAR(p) with intercept, estimated equation by equation. Matrices are stored
// row-major as nested vectors; coefficients[i] is the lag-(i+1) matrix whose
// (j,k) entry multiplies variable k in equation j.
struct VarModel {
  int p = 1;
  std::size_t n_vars = 0;
  std::vector<double> intercept;
  std::vector<std::vector<std::vector<double>>> coefficients;
  std::vector<std::vector<double>> sigma;
  bool stationary = true;  // companion-matrix spectral radius < 1
};

// Row-normalized generalized FEVD shares plus the directional aggregates.
// matrix[j][k] is the share of j's H-step forecast-error variance attributed
// to shocks in k; each row sums to 1.
struct SpilloverTable {
  std::vector<std::vector<double>> matrix;
  std::vector<double> to_others;         // off-diagonal column sums
  std::vector<double> from_others;       // off-diagonal row sums
  std::vector<double> to_including_own;  // full column sums
  std::vector<double> net;               // to_others - from_others
  double total_index = 0.0;              // percent of variance crossing assets
  int horizon = 10;
};

// Spectral radius of the companion matrix is below one (p = 0 passes).
bool var_stationary(const VarModel& model);

// Least squares with intercept on date-aligned series; sigma uses the
// T_eff - n p - 1 denominator (sample covariance when p = 0). Requires
// T > n p + 10 observations; rank-deficient regressors raise data_error.
VarModel fit_var(const std::vector<ReturnSeries>& returns, int p);

// Moving-average weights A_0..A_H: A_0 = I, A_h = sum_i Phi_i A_{h-i}.
std::vector<std::vector<std::vector<double>>> ma_coefficients(
    const VarModel& model, int horizon);

// H-step generalized FEVD (summation over h = 0..H-1) and the Table-10 style
// aggregates. horizon >= 1; a zero forecast-variance row raises data_error.
SpilloverTable gfevd(const VarModel& model, int horizon);

struct RollingSpilloverPoint {
  std::string date;  // last date inside the window
  SpilloverTable table;
  bool ok = true;  // false when the window's fit failed; table left empty
};

// gfevd over rolling windows; failed windows are flagged and skipped, the
// series continues. window > n p + 10, stride >= 1.
std::vector<RollingSpilloverPoint> rolling_spillover(
    const std::vector<ReturnSeries>& returns, int p, int horizon,
    std::size_t window, std::size_t stride);

}  // namespace tailrisk
