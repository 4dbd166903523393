#include "tailrisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tailrisk/errors.hpp"
#include "tailrisk/stats.hpp"

namespace tailrisk {
namespace {

constexpr double kLevelEps = 1e-12;

void require_finite(const std::vector<double>& x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) throw data_error(std::string(what) + ": non-finite value");
  }
}

double pinball(double x, double y, double alpha) {
  const double d = x - y;
  return d >= 0.0 ? alpha * d : (alpha - 1.0) * d;
}

// log(cosh(w)) without overflow for large |w|.
double log_cosh(double w) {
  const double a = std::abs(w);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

void check_level(double alpha, const char* what) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw config_error(std::string(what) + ": level must lie in (0, 1)");
  }
}

// Index of `level` in grid.alphas, matched within kLevelEps.
std::size_t level_index(const RiskLevelGrid& grid, double level) {
  for (std::size_t i = 0; i < grid.alphas.size(); ++i) {
    if (std::abs(grid.alphas[i] - level) <= kLevelEps) return i;
  }
  throw config_error("risk grid: rvar pair level missing from alphas");
}

// Sorted-sample VaR/ES at one level; `sorted` ascending, n * alpha >= 1.
struct TailPair {
  double var = 0.0;
  double es = 0.0;
};

TailPair tail_from_sorted(const std::vector<double>& sorted, double alpha) {
  const auto n = static_cast<double>(sorted.size());
  const auto k = static_cast<std::size_t>(std::ceil(alpha * n - 1e-9));
  double tail = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i) tail += sorted[i];
  tail /= n;
  const double frac = alpha - static_cast<double>(k - 1) / n;
  TailPair out;
  out.var = -sorted[k - 1];
  out.es = -(tail + frac * sorted[k - 1]) / alpha;
  return out;
}

double combine_rvar(double alpha, const TailPair& at_alpha, double beta,
                    const TailPair& at_beta) {
  if (std::abs(beta - alpha) <= kLevelEps) return at_alpha.var;
  return (beta * at_beta.es - alpha * at_alpha.es) / (beta - alpha);
}

TailPair parametric_tail(double mu, double sigma, double nu, double alpha) {
  const double scale = sigma * std::sqrt((nu - 2.0) / nu);
  const double q = stats::student_t_quantile(alpha, nu);
  TailPair out;
  out.var = -(mu + scale * q);
  out.es = -mu + scale * stats::student_t_pdf(q, nu) / alpha * (nu + q * q) / (nu - 1.0);
  return out;
}

void check_parametric_args(double mu, double sigma, double nu) {
  if (!(nu > 2.0)) throw config_error("parametric t risk: nu must exceed 2");
  if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
    throw config_error("parametric t risk: need finite mu and sigma > 0");
  }
}

}  // namespace

std::string to_string(RiskMethod method) {
  switch (method) {
    case RiskMethod::HS: return "HS";
    case RiskMethod::ParametricT: return "ParametricT";
    case RiskMethod::McsFrank: return "MCS-Frank";
    case RiskMethod::McsGumbel: return "MCS-Gumbel";
    case RiskMethod::McsJoe: return "MCS-Joe";
    case RiskMethod::McsStudentT: return "MCS-StudentT";
  }
  throw config_error("unknown risk method");
}

RiskMethod method_for(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::Frank: return RiskMethod::McsFrank;
    case CopulaFamily::Gumbel: return RiskMethod::McsGumbel;
    case CopulaFamily::Joe: return RiskMethod::McsJoe;
    case CopulaFamily::StudentT: return RiskMethod::McsStudentT;
  }
  throw config_error("unknown copula family");
}

void validate_levels(const RiskLevels& levels) {
  check_level(levels.alpha, "risk levels");
  if (levels.beta) {
    check_level(*levels.beta, "risk levels");
    if (*levels.beta < levels.alpha - kLevelEps) {
      throw config_error("risk levels: beta must be >= alpha");
    }
  }
}

void validate_grid(const RiskLevelGrid& grid) {
  if (grid.alphas.empty()) throw config_error("risk grid: no levels");
  for (double a : grid.alphas) check_level(a, "risk grid");
  for (const auto& [a, b] : grid.rvar_pairs) {
    check_level(a, "risk grid");
    check_level(b, "risk grid");
    if (b < a - kLevelEps) throw config_error("risk grid: rvar pair needs alpha <= beta");
    level_index(grid, a);
    level_index(grid, b);
  }
}

void validate_portfolio(const PortfolioSpec& spec) {
  if (spec.asset_a.empty() || spec.asset_b.empty()) {
    throw config_error("portfolio: empty asset id");
  }
  const double wa = spec.weight_a;
  const double wb = spec.weight_b;
  if (!std::isfinite(wa) || !std::isfinite(wb) || wa < 0.0 || wa > 1.0 ||
      wb < 0.0 || wb > 1.0 || std::abs(wa + wb - 1.0) > 1e-12) {
    throw config_error("portfolio: weights must lie in [0, 1] and sum to 1");
  }
}

std::pair<double, double> min_variance_weights(double var1, double var2,
                                               double cov) {
  if (!(var1 > 0.0) || !(var2 > 0.0) || !std::isfinite(cov)) {
    throw data_error("min variance weights: need positive finite variances");
  }
  const double denom = var1 + var2 - 2.0 * cov;
  if (!(denom > 1e-300)) {
    throw data_error("min variance weights: degenerate covariance matrix");
  }
  const double w1 = std::clamp((var2 - cov) / denom, 0.0, 1.0);
  return {w1, 1.0 - w1};
}

ReturnSeries portfolio_returns(const ReturnSeries& a, const ReturnSeries& b,
                               const PortfolioSpec& spec) {
  validate_portfolio(spec);
  if (a.values.size() != b.values.size() || a.dates.size() != b.dates.size()) {
    throw data_error("portfolio returns: legs differ in length");
  }
  if (a.dates != b.dates) {
    throw data_error("portfolio returns: legs are not date aligned");
  }
  ReturnSeries out;
  out.asset_id = spec.asset_a + "+" + spec.asset_b;
  out.dates = a.dates;
  out.values.resize(a.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    out.values[i] = spec.weight_a * a.values[i] + spec.weight_b * b.values[i];
  }
  return out;
}

RiskTriple risk_from_sample(std::vector<double> returns,
                            const RiskLevels& levels) {
  validate_levels(levels);
  require_finite(returns, "risk from sample");
  const auto n = static_cast<double>(returns.size());
  if (n * levels.alpha < 1.0 - 1e-9) {
    throw data_error("risk from sample: need at least 1/alpha observations");
  }
  std::sort(returns.begin(), returns.end());
  const TailPair at_alpha = tail_from_sorted(returns, levels.alpha);
  RiskTriple out;
  out.var = at_alpha.var;
  out.es = at_alpha.es;
  if (levels.beta && std::abs(*levels.beta - levels.alpha) > kLevelEps) {
    const TailPair at_beta = tail_from_sorted(returns, *levels.beta);
    out.rvar = combine_rvar(levels.alpha, at_alpha, *levels.beta, at_beta);
  } else {
    out.rvar = out.var;
  }
  return out;
}

RiskTriple parametric_t_risk(double mu, double sigma, double nu,
                             const RiskLevels& levels) {
  validate_levels(levels);
  check_parametric_args(mu, sigma, nu);
  const TailPair at_alpha = parametric_tail(mu, sigma, nu, levels.alpha);
  RiskTriple out;
  out.var = at_alpha.var;
  out.es = at_alpha.es;
  if (levels.beta && std::abs(*levels.beta - levels.alpha) > kLevelEps) {
    const TailPair at_beta = parametric_tail(mu, sigma, nu, *levels.beta);
    out.rvar = combine_rvar(levels.alpha, at_alpha, *levels.beta, at_beta);
  } else {
    out.rvar = out.var;
  }
  return out;
}

RiskEstimate estimate_from_sample(const std::vector<double>& returns,
                                  const RiskLevelGrid& grid,
                                  RiskMethod method) {
  validate_grid(grid);
  std::vector<double> sorted = returns;
  require_finite(sorted, "risk from sample");
  const auto n = static_cast<double>(sorted.size());
  const double min_alpha = *std::min_element(grid.alphas.begin(), grid.alphas.end());
  if (n * min_alpha < 1.0 - 1e-9) {
    throw data_error("risk from sample: need at least 1/alpha observations");
  }
  std::sort(sorted.begin(), sorted.end());
  RiskEstimate out;
  out.method = method;
  out.sample_size = sorted.size();
  std::vector<TailPair> tails(grid.alphas.size());
  for (std::size_t i = 0; i < grid.alphas.size(); ++i) {
    tails[i] = tail_from_sorted(sorted, grid.alphas[i]);
    out.var_values.push_back(tails[i].var);
    out.es_values.push_back(tails[i].es);
  }
  for (const auto& [a, b] : grid.rvar_pairs) {
    const TailPair& ta = tails[level_index(grid, a)];
    const TailPair& tb = tails[level_index(grid, b)];
    out.rvar_values.push_back(combine_rvar(a, ta, b, tb));
  }
  return out;
}

RiskEstimate estimate_parametric_t(double mu, double sigma, double nu,
                                   const RiskLevelGrid& grid) {
  validate_grid(grid);
  check_parametric_args(mu, sigma, nu);
  RiskEstimate out;
  out.method = RiskMethod::ParametricT;
  std::vector<TailPair> tails(grid.alphas.size());
  for (std::size_t i = 0; i < grid.alphas.size(); ++i) {
    tails[i] = parametric_tail(mu, sigma, nu, grid.alphas[i]);
    out.var_values.push_back(tails[i].var);
    out.es_values.push_back(tails[i].es);
  }
  for (const auto& [a, b] : grid.rvar_pairs) {
    const TailPair& ta = tails[level_index(grid, a)];
    const TailPair& tb = tails[level_index(grid, b)];
    out.rvar_values.push_back(combine_rvar(a, ta, b, tb));
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> joint_innovation_draws(
    const MarginalParams& marginal1, const MarginalParams& marginal2,
    const CopulaSpec& copula, std::size_t n_sim, std::uint64_t seed) {
  const auto uv = conditional_sample(copula, n_sim, seed);
  std::vector<double> z1(n_sim);
  std::vector<double> z2(n_sim);
  for (std::size_t i = 0; i < n_sim; ++i) {
    z1[i] = marginal_quantile(marginal1, uv[i].first);
    z2[i] = marginal_quantile(marginal2, uv[i].second);
  }
  return {std::move(z1), std::move(z2)};
}

RiskEstimate mcs_risk_from_draws(const std::vector<double>& z1,
                                 const std::vector<double>& z2, double mu1,
                                 double sigma1, double mu2, double sigma2,
                                 const PortfolioSpec& portfolio,
                                 const RiskLevelGrid& grid,
                                 RiskMethod method) {
  validate_grid(grid);
  validate_portfolio(portfolio);
  if (z1.size() != z2.size()) {
    throw data_error("copula mc risk: innovation draws differ in length");
  }
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0) || !std::isfinite(mu1) ||
      !std::isfinite(mu2)) {
    throw config_error("copula mc risk: need finite mu and sigma > 0");
  }
  const double min_alpha = *std::min_element(grid.alphas.begin(), grid.alphas.end());
  if (static_cast<double>(z1.size()) * min_alpha < 100.0 - 1e-9) {
    throw config_error("copula mc risk: need n_sim >= 100/alpha paths");
  }
  std::vector<double> portfolio_sample(z1.size());
  for (std::size_t i = 0; i < z1.size(); ++i) {
    portfolio_sample[i] = portfolio.weight_a * (mu1 + sigma1 * z1[i]) +
                          portfolio.weight_b * (mu2 + sigma2 * z2[i]);
  }
  return estimate_from_sample(portfolio_sample, grid, method);
}

RiskEstimate mcs_copula_risk(const MarginalParams& marginal1,
                             const MarginalParams& marginal2,
                             const CopulaSpec& copula, double mu1,
                             double sigma1, double mu2, double sigma2,
                             const PortfolioSpec& portfolio,
                             const RiskLevelGrid& grid, std::size_t n_sim,
                             std::uint64_t seed) {
  const auto [z1, z2] =
      joint_innovation_draws(marginal1, marginal2, copula, n_sim, seed);
  return mcs_risk_from_draws(z1, z2, mu1, sigma1, mu2, sigma2, portfolio, grid,
                             method_for(copula.family));
}

double score_var(double realized, double var_forecast, double alpha) {
  check_level(alpha, "var score");
  return pinball(realized, -var_forecast, alpha);
}

EsScore score_es(double realized, double var_forecast, double es_forecast,
                 double alpha) {
  check_level(alpha, "es score");
  const double x = realized;
  const double y = -var_forecast;
  double z = -es_forecast;
  EsScore out;
  if (std::abs(z) > 50.0) {
    z = std::clamp(z, -50.0, 50.0);
    out.clamped = true;
  }
  const double ind = x < y ? 1.0 : 0.0;
  const double ez = std::exp(z);
  out.value = y * (ind - alpha) - x * ind +
              ez * (z - y + ind / alpha * (y - x)) - ez + 1.0 -
              std::log1p(-alpha);
  return out;
}

double score_rvar(double realized, double var_alpha, double var_beta,
                  double rvar, double alpha, double beta) {
  check_level(alpha, "rvar score");
  check_level(beta, "rvar score");
  if (!(beta > alpha)) throw config_error("rvar score: needs alpha < beta");
  const double x = realized;
  const double y = -var_alpha;
  const double z = -var_beta;
  const double w = -rvar;
  const double ia = x < y ? 1.0 : 0.0;
  const double ib = x < z ? 1.0 : 0.0;
  const double d = beta - alpha;
  const double gap = pinball(x, z, beta) - pinball(x, y, alpha);
  return y * (ia - alpha) - x * ia + z * (ib - beta) - x * ib +
         d * std::tanh(d * w) * (w + gap / d) - log_cosh(d * w) + 1.0 -
         std::log1p(-alpha);
}

double legal_robustness(const std::vector<double>& estimates) {
  if (estimates.size() < 2) {
    throw data_error("legal robustness: need at least two estimates");
  }
  require_finite(estimates, "legal robustness");
  const double centre = stats::mean(estimates);
  if (centre == 0.0) {
    throw data_error("legal robustness: undefined for zero mean");
  }
  double mad = 0.0;
  for (double v : estimates) mad += std::abs(v - centre);
  mad /= static_cast<double>(estimates.size());
  return mad / centre;
}

EvaluationResult evaluate_methods(const std::vector<double>& realized,
                                  const std::vector<MethodForecasts>& methods,
                                  const RiskLevelGrid& grid) {
  validate_grid(grid);
  const std::size_t n = realized.size();
  if (n == 0) throw data_error("evaluate methods: empty evaluation window");
  if (methods.empty()) throw data_error("evaluate methods: no methods");
  require_finite(realized, "evaluate methods");
  const std::size_t na = grid.alphas.size();
  const std::size_t np = grid.rvar_pairs.size();
  for (const auto& m : methods) {
    if (m.var_forecasts.size() != n || m.es_forecasts.size() != n ||
        m.rvar_forecasts.size() != n) {
      throw data_error("evaluate methods: forecasts misaligned with dates");
    }
    for (std::size_t t = 0; t < n; ++t) {
      if (m.var_forecasts[t].size() != na || m.es_forecasts[t].size() != na ||
          m.rvar_forecasts[t].size() != np) {
        throw data_error("evaluate methods: forecasts misaligned with grid");
      }
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> pair_index;
  for (const auto& [a, b] : grid.rvar_pairs) {
    pair_index.emplace_back(level_index(grid, a), level_index(grid, b));
  }

  EvaluationResult out;
  for (const auto& m : methods) {
    ScoreReport rep;
    rep.method = m.method;
    rep.var_scores.assign(na, 0.0);
    rep.es_scores.assign(na, 0.0);
    rep.rvar_scores.assign(np, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t i = 0; i < na; ++i) {
        const double alpha = grid.alphas[i];
        rep.var_scores[i] += score_var(realized[t], m.var_forecasts[t][i], alpha);
        const EsScore es = score_es(realized[t], m.var_forecasts[t][i],
                                    m.es_forecasts[t][i], alpha);
        rep.es_scores[i] += es.value;
        rep.es_clamped = rep.es_clamped || es.clamped;
      }
      for (std::size_t p = 0; p < np; ++p) {
        const auto& [a, b] = grid.rvar_pairs[p];
        rep.rvar_scores[p] += score_rvar(
            realized[t], m.var_forecasts[t][pair_index[p].first],
            m.var_forecasts[t][pair_index[p].second], m.rvar_forecasts[t][p],
            a, b);
      }
    }
    const auto dn = static_cast<double>(n);
    for (double& s : rep.var_scores) s /= dn;
    for (double& s : rep.es_scores) s /= dn;
    for (double& s : rep.rvar_scores) s /= dn;
    out.scores.push_back(std::move(rep));
  }

  if (methods.size() >= 2) {
    out.var_lr.assign(na, 0.0);
    out.es_lr.assign(na, 0.0);
    out.rvar_lr.assign(np, 0.0);
    std::vector<double> across(methods.size());
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          across[mi] = methods[mi].var_forecasts[t][i];
        }
        out.var_lr[i] += legal_robustness(across);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          across[mi] = methods[mi].es_forecasts[t][i];
        }
        out.es_lr[i] += legal_robustness(across);
      }
      for (std::size_t p = 0; p < np; ++p) {
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          across[mi] = methods[mi].rvar_forecasts[t][p];
        }
        out.rvar_lr[p] += legal_robustness(across);
      }
    }
    const auto dn = static_cast<double>(n);
    for (double& v : out.var_lr) v /= dn;
    for (double& v : out.es_lr) v /= dn;
    for (double& v : out.rvar_lr) v /= dn;
  }
  return out;
}

}  // namespace tailrisk
