#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tailrisk/diagnostics.hpp"  // TestResult

namespace tailrisk {

enum class MarginalFamily { BATs, GNG, Cauchy };

std::string to_string(MarginalFamily family);
MarginalFamily marginal_family_from_string(const std::string& name);

// Bulk-and-tails: CDF = T_nu(H(x)) where H stitches two softplus-power tails.
// kappa < 0 bounds the corresponding tail; tau > 0, nu > 0.
struct BatsParams {
  double kappa0 = 0.1, tau0 = 1.0, phi0 = -1.0;  // lower tail
  double kappa1 = 0.1, tau1 = 1.0, phi1 = 1.0;   // upper tail
  double nu = 5.0;
};

// Normal bulk with generalized-Pareto tails spliced at u_lo/u_hi; GPD scales
// alpha_lo/alpha_hi are derived from density continuity, not free parameters.
struct GngParams {
  double mu = 0.0, sigma = 1.0;
  double u_lo = -1.0, xi_lo = 0.1, phi_lo = 0.1;
  double u_hi = 1.0, xi_hi = 0.1, phi_hi = 0.1;
};

struct CauchyParams {
  double x0 = 0.0;
  double delta = 1.0;
};

using MarginalParams = std::variant<BatsParams, GngParams, CauchyParams>;

struct MarginalFit {
  MarginalFamily family = MarginalFamily::Cauchy;
  MarginalParams params;
  double loglik = 0.0;
  double bic = 0.0;  // -2 loglik + k ln n, absolute scale
  TestResult cvm;
  TestResult ad;
  bool monotone_ok = true;  // numeric CDF monotonicity screen (BATs)
};

// GPD scales implied by density continuity at the GNG thresholds.
double gng_alpha_lo(const GngParams& p);
double gng_alpha_hi(const GngParams& p);

// BATs support bounds; +-infinity when the corresponding kappa >= 0.
double bats_lower_bound(const BatsParams& p);
double bats_upper_bound(const BatsParams& p);
double bats_h(const BatsParams& p, double x);
double bats_h_prime(const BatsParams& p, double x);

double marginal_cdf(const MarginalParams& params, double x);
double marginal_pdf(const MarginalParams& params, double x);
double marginal_quantile(const MarginalParams& params, double p);
double marginal_loglik(const MarginalParams& params, const std::vector<double>& x);

// Inverse-transform draws; deterministic per seed.
std::vector<double> marginal_sample(const MarginalParams& params, std::size_t n,
                                    std::uint64_t seed);

// Cramer-von Mises / Anderson-Darling / Kolmogorov-Smirnov statistics of
// PIT values against the uniform law. Input need not be sorted.
double cvm_statistic(std::vector<double> u);
double ad_statistic(std::vector<double> u);
double ks_statistic(std::vector<double> u);

// MLE with restarts; CvM/AD p-values by parametric bootstrap (refitting each
// replicate). Throws data_error on degenerate input, numeric_error when no
// start converges.
MarginalFit fit_marginal(const std::vector<double>& residuals, MarginalFamily family,
                         int bootstrap_reps = 200, std::uint64_t seed = 0,
                         int restarts = 3);

// Fits every family, drops failures, ranks survivors by ascending BIC.
std::vector<MarginalFit> compare_marginals(const std::vector<double>& residuals,
                                           const std::vector<MarginalFamily>& families,
                                           int bootstrap_reps = 200,
                                           std::uint64_t seed = 0,
                                           int restarts = 3);

// u_i = cdf(z_i) clamped to [1e-10, 1 - 1e-10].
std::vector<double> pit_transform(const std::vector<double>& residuals,
                                  const MarginalFit& fit);

}  // namespace tailrisk
