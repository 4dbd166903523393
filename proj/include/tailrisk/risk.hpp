#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tailrisk/copula.hpp"
#include "tailrisk/evt.hpp"
#include "tailrisk/series.hpp"

namespace tailrisk {

// Estimation routes for the tail-risk tables. The MCS variants differ only in
// the copula family driving the joint innovation draws.
enum class RiskMethod { HS, ParametricT, McsFrank, McsGumbel, McsJoe, McsStudentT };

std::string to_string(RiskMethod method);
RiskMethod method_for(CopulaFamily family);

// One evaluation level: VaR and ES at alpha, plus range VaR over [alpha, beta]
// when beta is present. alpha == beta (or beta absent) degenerates RVaR to VaR.
struct RiskLevels {
  double alpha = 0.05;
  std::optional<double> beta;
};

// All measures use the loss-positive reporting convention: var = 0.03 means a
// 3% loss at the stated level.
struct RiskTriple {
  double var = 0.0;
  double es = 0.0;
  double rvar = 0.0;
};

// Full evaluation grid for an estimate table. Every rvar pair must satisfy
// alpha <= beta and reference levels present in `alphas` so that scoring can
// match each pair with its VaR forecasts.
struct RiskLevelGrid {
  std::vector<double> alphas;
  std::vector<std::pair<double, double>> rvar_pairs;
};

struct RiskEstimate {
  RiskMethod method = RiskMethod::HS;
  std::vector<double> var_values;   // parallel to grid.alphas
  std::vector<double> es_values;    // parallel to grid.alphas
  std::vector<double> rvar_values;  // parallel to grid.rvar_pairs
  std::size_t sample_size = 0;
};

// Two-asset long-only portfolio; weights sum to one.
struct PortfolioSpec {
  std::string asset_a;
  std::string asset_b;
  double weight_a = 0.5;
  double weight_b = 0.5;
};

// Throw config_error on violated parameter domains.
void validate_levels(const RiskLevels& levels);
void validate_grid(const RiskLevelGrid& grid);
void validate_portfolio(const PortfolioSpec& spec);

// w1 = (var2 - cov) / (var1 + var2 - 2 cov), clamped to [0, 1]; returns
// (w1, 1 - w1). Throws data_error on a degenerate covariance matrix.
std::pair<double, double> min_variance_weights(double var1, double var2,
                                               double cov);

// Elementwise weighted combination of two date-aligned return series.
ReturnSeries portfolio_returns(const ReturnSeries& a, const ReturnSeries& b,
                               const PortfolioSpec& spec);

// Empirical measures from an unconditional sample. VaR is the negated k-th
// order statistic with k = ceil(alpha n); ES averages the tail including the
// fractional weight on the k-th observation, so ties are handled exactly.
// RVaR is recovered from the two ES levels:
//   RVaR = (beta ES_beta - alpha ES_alpha) / (beta - alpha).
// Requires n >= 1/alpha, throws data_error otherwise.
RiskTriple risk_from_sample(std::vector<double> returns,
                            const RiskLevels& levels);

// Closed forms under r = mu + sigma * t_nu / sqrt(nu / (nu - 2)) (unit
// variance scaling). Requires nu > 2 and sigma > 0, throws config_error.
RiskTriple parametric_t_risk(double mu, double sigma, double nu,
                             const RiskLevels& levels);

// Grid versions sharing one sort / one set of quantile calls.
RiskEstimate estimate_from_sample(const std::vector<double>& returns,
                                  const RiskLevelGrid& grid, RiskMethod method);
RiskEstimate estimate_parametric_t(double mu, double sigma, double nu,
                                   const RiskLevelGrid& grid);

// Standardized innovation pairs from the fitted joint: copula draws pushed
// through the marginal quantile functions. Depends only on the arguments and
// the seed, so reusing a seed across calls yields common random numbers.
std::pair<std::vector<double>, std::vector<double>> joint_innovation_draws(
    const MarginalParams& marginal1, const MarginalParams& marginal2,
    const CopulaSpec& copula, std::size_t n_sim, std::uint64_t seed);

// Combines pre-drawn innovations with per-asset location/scale forecasts into
// portfolio returns and reads the measures off the simulated sample.
// Requires n_sim >= 100/min(alpha), throws config_error otherwise.
RiskEstimate mcs_risk_from_draws(const std::vector<double>& z1,
                                 const std::vector<double>& z2, double mu1,
                                 double sigma1, double mu2, double sigma2,
                                 const PortfolioSpec& portfolio,
                                 const RiskLevelGrid& grid, RiskMethod method);

// One-call copula Monte Carlo estimate (draws + combine).
RiskEstimate mcs_copula_risk(const MarginalParams& marginal1,
                             const MarginalParams& marginal2,
                             const CopulaSpec& copula, double mu1,
                             double sigma1, double mu2, double sigma2,
                             const PortfolioSpec& portfolio,
                             const RiskLevelGrid& grid, std::size_t n_sim,
                             std::uint64_t seed);

// Consistent scoring functions, reported as losses (lower is better).
// Forecast arguments use the loss-positive convention above; internally every
// forecast argument is negated into return space, which is where the scores
// attain their minima (the return-space quantile, tail mean, and trimmed tail
// mean respectively).

// Pinball loss alpha (x - y)^+ + (1 - alpha) (x - y)^- at y = -var_forecast.
double score_var(double realized, double var_forecast, double alpha);

struct EsScore {
  double value = 0.0;
  bool clamped = false;  // ES argument exceeded |z| = 50 and was clamped
};

// Joint VaR/ES score with an exponential link in the ES argument. The link
// overflows for large |z|, so the argument is clamped to [-50, 50] and the
// clamp is flagged.
EsScore score_es(double realized, double var_forecast, double es_forecast,
                 double alpha);

// Joint (VaR_alpha, VaR_beta, RVaR) score with a tanh/log-cosh link in the
// range-VaR argument; finite for arbitrarily large |rvar|.
double score_rvar(double realized, double var_alpha, double var_beta,
                  double rvar, double alpha, double beta);

// Mean absolute deviation over the mean across method estimates of the same
// measure. Requires >= 2 finite estimates with nonzero mean (data_error).
double legal_robustness(const std::vector<double>& estimates);

// Per-method forecast paths over a common evaluation window; rows parallel to
// the realized returns, columns parallel to the grid.
struct MethodForecasts {
  RiskMethod method = RiskMethod::HS;
  std::vector<std::vector<double>> var_forecasts;
  std::vector<std::vector<double>> es_forecasts;
  std::vector<std::vector<double>> rvar_forecasts;
};

struct ScoreReport {
  RiskMethod method = RiskMethod::HS;
  std::vector<double> var_scores;   // average score per grid alpha
  std::vector<double> es_scores;    // average score per grid alpha
  std::vector<double> rvar_scores;  // average score per grid pair
  bool es_clamped = false;
};

// Scores averaged over dates per method, plus cross-method dispersion
// (legal robustness) per date averaged over dates. The lr vectors are left
// empty when fewer than two methods are supplied.
struct EvaluationResult {
  std::vector<ScoreReport> scores;
  std::vector<double> var_lr;   // per grid alpha
  std::vector<double> es_lr;    // per grid alpha
  std::vector<double> rvar_lr;  // per grid pair
};

// Throws data_error when any forecast path is misaligned with the realized
// window or with the grid.
EvaluationResult evaluate_methods(const std::vector<double>& realized,
                                  const std::vector<MethodForecasts>& methods,
                                  const RiskLevelGrid& grid);

}  // namespace tailrisk
