#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tailrisk {

enum class CopulaFamily { Frank, Gumbel, Joe, StudentT };

std::string to_string(CopulaFamily family);
CopulaFamily copula_family_from_string(const std::string& name);

// theta domains: Frank any real (0 treated as the independence limit),
// Gumbel/Joe >= 1, StudentT in (-1,1) with nu > 2.
struct CopulaSpec {
  CopulaFamily family = CopulaFamily::Frank;
  double theta = 0.0;
  double nu = 0.0;  // StudentT only
};

// throws config_error when theta/nu violate the family domain
void validate_copula_spec(const CopulaSpec& spec);

struct CopulaFit {
  CopulaSpec spec;
  double loglik = 0.0;
  std::vector<double> standard_error;  // theta, then nu for StudentT
  std::size_t n = 0;
};

struct DependenceSummary {
  double kendall_tau = 0.0;
  double tail_lower = 0.0;
  double tail_upper = 0.0;
};

double copula_cdf(const CopulaSpec& spec, double u1, double u2);
double copula_density(const CopulaSpec& spec, double u1, double u2);
double copula_log_density(const CopulaSpec& spec, double u1, double u2);

// h(u2|u1) = dC/du1, the conditional CDF of U2 given U1 = u1
double conditional_cdf(const CopulaSpec& spec, double u2, double u1);

// u2 such that conditional_cdf(u2|u1) = v; closed form for Frank and
// StudentT, bracketed bisection for Gumbel and Joe
double conditional_quantile(const CopulaSpec& spec, double v, double u1);

// (u1, u2) pairs via u1 ~ uniform, u2 = h-inverse(v|u1); deterministic per seed
std::vector<std::pair<double, double>> conditional_sample(const CopulaSpec& spec,
                                                          std::size_t n,
                                                          std::uint64_t seed);

// Kendall tau plus lower/upper tail-dependence coefficients
DependenceSummary dependence_summary(const CopulaSpec& spec);

// MLE over the family domain, started from Kendall-tau inversion; standard
// errors from the observed information. Throws data_error for n < 100 or
// observations outside (0,1), numeric_error on non-convergence.
CopulaFit fit_copula(const std::vector<std::pair<double, double>>& pseudo_obs,
                     CopulaFamily family);

}  // namespace tailrisk
