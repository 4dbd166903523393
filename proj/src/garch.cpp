#include "tailrisk/garch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "tailrisk/errors.hpp"
#include "tailrisk/optim.hpp"
#include "tailrisk/rng.hpp"
#include "tailrisk/stats.hpp"

namespace tailrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxPersistence = 0.999;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

// Largest |eigenvalue| of the lag-polynomial companion matrix; < 1 means the
// AR part is stationary (or the MA part invertible).
double companion_spectral_radius(const std::vector<double>& coefs) {
  const std::size_t d = coefs.size();
  if (d == 0) return 0.0;
  if (d == 1) return std::fabs(coefs[0]);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<int>(d), static_cast<int>(d));
  for (std::size_t j = 0; j < d; ++j) c(0, static_cast<int>(j)) = coefs[j];
  for (std::size_t j = 1; j < d; ++j) c(static_cast<int>(j), static_cast<int>(j - 1)) = 1.0;
  return c.eigenvalues().cwiseAbs().maxCoeff();
}

int variance_param_count(const GarchSpec& spec) {
  switch (spec.kind) {
    case VarianceKind::sGARCH:
      return 1 + spec.arch_order + spec.garch_lags;
    case VarianceKind::eGARCH:
    case VarianceKind::gjrGARCH:
      return 1 + 2 * spec.arch_order + spec.garch_lags;
  }
  return 0;
}

int total_param_count(const GarchSpec& spec) {
  return 1 + spec.ar + spec.ma + variance_param_count(spec) + 1;
}

void validate_spec(const GarchSpec& spec) {
  if (spec.arch_order < 1 || spec.garch_lags < 1) {
    throw config_error("garch: variance orders must be >= 1");
  }
  if (spec.ar < 0 || spec.ma < 0 || spec.ar > 8 || spec.ma > 8) {
    throw config_error("garch: ARMA orders must lie in [0, 8]");
  }
}

// Unconstrained-vector layout shared by the start builder and the unpacker:
// [mu, ar..., ma..., variance block..., x_nu].
struct Transform {
  GarchSpec spec;

  std::size_t size() const {
    std::size_t nv = 0;
    const std::size_t p = static_cast<std::size_t>(spec.arch_order);
    const std::size_t q = static_cast<std::size_t>(spec.garch_lags);
    switch (spec.kind) {
      case VarianceKind::sGARCH:
        nv = 2 + (p + q - 1);
        break;
      case VarianceKind::gjrGARCH:
        nv = 2 + (2 * p + q - 1);
        break;
      case VarianceKind::eGARCH:
        nv = 1 + 2 * p + q;
        break;
    }
    return 1 + static_cast<std::size_t>(spec.ar + spec.ma) + nv + 1;
  }

  GarchParams unpack(const std::vector<double>& x) const {
    GarchParams out;
    const std::size_t p = static_cast<std::size_t>(spec.arch_order);
    const std::size_t q = static_cast<std::size_t>(spec.garch_lags);
    std::size_t i = 0;
    out.mu = x[i++];
    out.ar.assign(x.begin() + static_cast<long>(i), x.begin() + static_cast<long>(i + spec.ar));
    i += static_cast<std::size_t>(spec.ar);
    out.ma.assign(x.begin() + static_cast<long>(i), x.begin() + static_cast<long>(i + spec.ma));
    i += static_cast<std::size_t>(spec.ma);

    if (spec.kind == VarianceKind::eGARCH) {
      out.omega = x[i++];
      out.alpha.assign(x.begin() + static_cast<long>(i), x.begin() + static_cast<long>(i + p));
      i += p;
      out.gamma.assign(x.begin() + static_cast<long>(i), x.begin() + static_cast<long>(i + p));
      i += p;
      out.beta.resize(q);
      for (std::size_t j = 0; j < q; ++j) {
        out.beta[j] = kMaxPersistence * std::tanh(x[i++]) / static_cast<double>(q);
      }
    } else {
      const std::size_t slots = (spec.kind == VarianceKind::sGARCH) ? p + q : 2 * p + q;
      out.omega = std::exp(std::min(x[i++], 300.0));
      const double persistence = kMaxPersistence * sigmoid(x[i++]);
      std::vector<double> logits(slots, 0.0);
      for (std::size_t s = 1; s < slots; ++s) logits[s] = x[i++];
      const double mx = *std::max_element(logits.begin(), logits.end());
      double denom = 0.0;
      for (double& l : logits) {
        l = std::exp(l - mx);
        denom += l;
      }
      std::size_t s = 0;
      out.alpha.resize(p);
      for (std::size_t k = 0; k < p; ++k) out.alpha[k] = persistence * logits[s++] / denom;
      if (spec.kind == VarianceKind::gjrGARCH) {
        out.gamma.resize(p);
        // each gamma contributes gamma/2 to the persistence budget
        for (std::size_t k = 0; k < p; ++k) out.gamma[k] = 2.0 * persistence * logits[s++] / denom;
      }
      out.beta.resize(q);
      for (std::size_t k = 0; k < q; ++k) out.beta[k] = persistence * logits[s++] / denom;
    }
    out.nu = 2.0 + std::exp(std::min(x[i++], 40.0));
    return out;
  }

  std::vector<double> moment_start(const std::vector<double>& returns) const {
    const double m = stats::mean(returns);
    const double v = std::max(stats::variance(returns), 1e-12);
    const std::size_t p = static_cast<std::size_t>(spec.arch_order);
    const std::size_t q = static_cast<std::size_t>(spec.garch_lags);

    std::vector<double> x;
    x.reserve(size());
    x.push_back(m);
    for (int k = 0; k < spec.ar + spec.ma; ++k) x.push_back(0.0);

    if (spec.kind == VarianceKind::eGARCH) {
      x.push_back(0.05 * std::log(v));  // omega = (1 - beta) log(v)
      for (std::size_t k = 0; k < p; ++k) x.push_back(-0.05);
      for (std::size_t k = 0; k < p; ++k) x.push_back(0.15);
      for (std::size_t k = 0; k < q; ++k) x.push_back(std::atanh(0.95 / kMaxPersistence));
    } else {
      x.push_back(std::log(v * 0.06));  // omega = v (1 - P), P = 0.94
      x.push_back(logit(0.94 / kMaxPersistence));
      // softmax slots: first (an alpha slot) is pinned to logit 0
      const double alpha_share = (spec.kind == VarianceKind::sGARCH) ? 0.08 : 0.06;
      const double gamma_share = 0.02;  // gamma/2 budget share, gjr only
      const double beta_share = 0.94 - alpha_share -
                                ((spec.kind == VarianceKind::gjrGARCH) ? gamma_share : 0.0);
      const double a0 = alpha_share / static_cast<double>(p);
      for (std::size_t k = 1; k < p; ++k) x.push_back(0.0);
      if (spec.kind == VarianceKind::gjrGARCH) {
        for (std::size_t k = 0; k < p; ++k) {
          x.push_back(std::log((gamma_share / static_cast<double>(p)) / a0));
        }
      }
      for (std::size_t k = 0; k < q; ++k) {
        x.push_back(std::log((beta_share / static_cast<double>(q)) / a0));
      }
    }
    x.push_back(std::log(8.0 - 2.0));  // nu = 8
    return x;
  }
};

void arma_residuals(const GarchParams& params, const std::vector<double>& returns,
                    std::vector<double>& eps) {
  const std::size_t n = returns.size();
  eps.resize(n);
  const std::size_t pa = params.ar.size();
  const std::size_t qm = params.ma.size();
  for (std::size_t t = 0; t < n; ++t) {
    double mean_t = params.mu;
    for (std::size_t i = 0; i < pa; ++i) {
      const double r_lag = (t >= i + 1) ? returns[t - i - 1] : params.mu;
      mean_t += params.ar[i] * r_lag;
    }
    for (std::size_t j = 0; j < qm; ++j) {
      const double e_lag = (t >= j + 1) ? eps[t - j - 1] : 0.0;
      mean_t += params.ma[j] * e_lag;
    }
    eps[t] = returns[t] - mean_t;
  }
}

}  // namespace

std::string to_string(VarianceKind kind) {
  switch (kind) {
    case VarianceKind::sGARCH: return "sGARCH";
    case VarianceKind::eGARCH: return "eGARCH";
    case VarianceKind::gjrGARCH: return "gjrGARCH";
  }
  return "?";
}

VarianceKind variance_kind_from_string(const std::string& name) {
  if (name == "sGARCH") return VarianceKind::sGARCH;
  if (name == "eGARCH") return VarianceKind::eGARCH;
  if (name == "gjrGARCH") return VarianceKind::gjrGARCH;
  throw config_error("unknown GARCH kind: " + name);
}

FilterOutput garch_filter(const GarchSpec& spec, const GarchParams& params,
                          const std::vector<double>& returns) {
  validate_spec(spec);
  const std::size_t n = returns.size();
  FilterOutput out;
  arma_residuals(params, returns, out.residuals);

  double h0 = 0.0;
  for (double e : out.residuals) h0 += e * e;
  h0 = std::max(h0 / static_cast<double>(n), 1e-12);

  const std::size_t p = static_cast<std::size_t>(spec.arch_order);
  const std::size_t q = static_cast<std::size_t>(spec.garch_lags);
  const std::size_t m = std::max(p, q);

  out.cond_variance.assign(n, h0);
  auto& h = out.cond_variance;
  const auto& eps = out.residuals;

  bool ok = true;
  for (std::size_t t = m; t < n && ok; ++t) {
    double ht = 0.0;
    switch (spec.kind) {
      case VarianceKind::sGARCH: {
        ht = params.omega;
        for (std::size_t i = 0; i < p; ++i) ht += params.alpha[i] * eps[t - i - 1] * eps[t - i - 1];
        for (std::size_t j = 0; j < q; ++j) ht += params.beta[j] * h[t - j - 1];
        break;
      }
      case VarianceKind::gjrGARCH: {
        ht = params.omega;
        for (std::size_t i = 0; i < p; ++i) {
          const double e = eps[t - i - 1];
          const double lever = (e < 0.0) ? params.gamma[i] : 0.0;
          ht += (params.alpha[i] + lever) * e * e;
        }
        for (std::size_t j = 0; j < q; ++j) ht += params.beta[j] * h[t - j - 1];
        break;
      }
      case VarianceKind::eGARCH: {
        double lh = params.omega;
        for (std::size_t i = 0; i < p; ++i) {
          const double hl = h[t - i - 1];
          if (!(hl > 0.0)) { ok = false; break; }
          const double z = eps[t - i - 1] / std::sqrt(hl);
          lh += params.alpha[i] * z + params.gamma[i] * std::fabs(z);
        }
        for (std::size_t j = 0; j < q; ++j) lh += params.beta[j] * std::log(h[t - j - 1]);
        ht = std::exp(std::clamp(lh, -300.0, 300.0));
        break;
      }
    }
    if (!(ht > 0.0) || !std::isfinite(ht)) {
      ok = false;
      break;
    }
    h[t] = ht;
  }

  out.std_residuals.resize(n);
  double ll = 0.0;
  if (ok) {
    for (std::size_t t = 0; t < n; ++t) {
      const double z = eps[t] / std::sqrt(h[t]);
      out.std_residuals[t] = z;
      ll += stats::std_t_logpdf(z, params.nu) - 0.5 * std::log(h[t]);
    }
  }
  out.loglik = ok && std::isfinite(ll) ? ll : -kInf;
  return out;
}

VolForecast one_step_forecast(const GarchSpec& spec, const GarchParams& params,
                              const std::vector<double>& returns,
                              const FilterOutput& filtered) {
  const std::size_t n = returns.size();
  const auto& eps = filtered.residuals;
  const auto& h = filtered.cond_variance;

  VolForecast f;
  f.nu = params.nu;
  f.mu = params.mu;
  for (std::size_t i = 0; i < params.ar.size(); ++i) {
    const double r_lag = (n >= i + 1) ? returns[n - i - 1] : params.mu;
    f.mu += params.ar[i] * r_lag;
  }
  for (std::size_t j = 0; j < params.ma.size(); ++j) {
    const double e_lag = (n >= j + 1) ? eps[n - j - 1] : 0.0;
    f.mu += params.ma[j] * e_lag;
  }

  const std::size_t p = static_cast<std::size_t>(spec.arch_order);
  const std::size_t q = static_cast<std::size_t>(spec.garch_lags);
  double h_next = 0.0;
  switch (spec.kind) {
    case VarianceKind::sGARCH: {
      h_next = params.omega;
      for (std::size_t i = 0; i < p; ++i) h_next += params.alpha[i] * eps[n - i - 1] * eps[n - i - 1];
      for (std::size_t j = 0; j < q; ++j) h_next += params.beta[j] * h[n - j - 1];
      break;
    }
    case VarianceKind::gjrGARCH: {
      h_next = params.omega;
      for (std::size_t i = 0; i < p; ++i) {
        const double e = eps[n - i - 1];
        const double lever = (e < 0.0) ? params.gamma[i] : 0.0;
        h_next += (params.alpha[i] + lever) * e * e;
      }
      for (std::size_t j = 0; j < q; ++j) h_next += params.beta[j] * h[n - j - 1];
      break;
    }
    case VarianceKind::eGARCH: {
      double lh = params.omega;
      for (std::size_t i = 0; i < p; ++i) {
        const double z = eps[n - i - 1] / std::sqrt(h[n - i - 1]);
        lh += params.alpha[i] * z + params.gamma[i] * std::fabs(z);
      }
      for (std::size_t j = 0; j < q; ++j) lh += params.beta[j] * std::log(h[n - j - 1]);
      h_next = std::exp(std::clamp(lh, -300.0, 300.0));
      break;
    }
  }
  f.sigma = std::sqrt(h_next);
  return f;
}

bool params_stationary(const GarchSpec& spec, const GarchParams& params) {
  if (companion_spectral_radius(params.ar) >= 1.0) return false;
  switch (spec.kind) {
    case VarianceKind::sGARCH: {
      const double s = std::accumulate(params.alpha.begin(), params.alpha.end(), 0.0) +
                       std::accumulate(params.beta.begin(), params.beta.end(), 0.0);
      return s < 1.0 && params.omega > 0.0;
    }
    case VarianceKind::gjrGARCH: {
      const double s = std::accumulate(params.alpha.begin(), params.alpha.end(), 0.0) +
                       0.5 * std::accumulate(params.gamma.begin(), params.gamma.end(), 0.0) +
                       std::accumulate(params.beta.begin(), params.beta.end(), 0.0);
      return s < 1.0 && params.omega > 0.0;
    }
    case VarianceKind::eGARCH: {
      const double s = std::accumulate(params.beta.begin(), params.beta.end(), 0.0);
      return std::fabs(s) < 1.0;
    }
  }
  return false;
}

std::vector<double> simulate_garch(const GarchSpec& spec, const GarchParams& params,
                                   std::size_t n, std::uint64_t seed) {
  validate_spec(spec);
  if (!params_stationary(spec, params) || !(params.nu > 2.0)) {
    throw config_error("simulate_garch: non-stationary or invalid parameters");
  }
  const std::size_t burn = 1000;
  const std::size_t total = n + burn;
  auto rng = RngStream::substream(seed, "garch/simulate");

  // start at the unconditional variance
  double h_uncond = 0.0;
  switch (spec.kind) {
    case VarianceKind::sGARCH: {
      const double s = std::accumulate(params.alpha.begin(), params.alpha.end(), 0.0) +
                       std::accumulate(params.beta.begin(), params.beta.end(), 0.0);
      h_uncond = params.omega / (1.0 - s);
      break;
    }
    case VarianceKind::gjrGARCH: {
      const double s = std::accumulate(params.alpha.begin(), params.alpha.end(), 0.0) +
                       0.5 * std::accumulate(params.gamma.begin(), params.gamma.end(), 0.0) +
                       std::accumulate(params.beta.begin(), params.beta.end(), 0.0);
      h_uncond = params.omega / (1.0 - s);
      break;
    }
    case VarianceKind::eGARCH: {
      const double s = std::accumulate(params.beta.begin(), params.beta.end(), 0.0);
      h_uncond = std::exp(params.omega / (1.0 - s));
      break;
    }
  }
  h_uncond = std::max(h_uncond, 1e-12);

  std::vector<double> h(total, h_uncond), eps(total, 0.0), z(total, 0.0), r(total, params.mu);
  const std::size_t p = static_cast<std::size_t>(spec.arch_order);
  const std::size_t q = static_cast<std::size_t>(spec.garch_lags);

  for (std::size_t t = 0; t < total; ++t) {
    double ht = h_uncond;
    if (t >= std::max(p, q)) {
      switch (spec.kind) {
        case VarianceKind::sGARCH: {
          ht = params.omega;
          for (std::size_t i = 0; i < p; ++i) ht += params.alpha[i] * eps[t - i - 1] * eps[t - i - 1];
          for (std::size_t j = 0; j < q; ++j) ht += params.beta[j] * h[t - j - 1];
          break;
        }
        case VarianceKind::gjrGARCH: {
          ht = params.omega;
          for (std::size_t i = 0; i < p; ++i) {
            const double e = eps[t - i - 1];
            const double lever = (e < 0.0) ? params.gamma[i] : 0.0;
            ht += (params.alpha[i] + lever) * e * e;
          }
          for (std::size_t j = 0; j < q; ++j) ht += params.beta[j] * h[t - j - 1];
          break;
        }
        case VarianceKind::eGARCH: {
          double lh = params.omega;
          for (std::size_t i = 0; i < p; ++i) {
            lh += params.alpha[i] * z[t - i - 1] + params.gamma[i] * std::fabs(z[t - i - 1]);
          }
          for (std::size_t j = 0; j < q; ++j) lh += params.beta[j] * std::log(h[t - j - 1]);
          ht = std::exp(std::clamp(lh, -300.0, 300.0));
          break;
        }
      }
    }
    h[t] = ht;
    z[t] = rng.student_t_unit_variance(params.nu);
    eps[t] = std::sqrt(ht) * z[t];

    double mean_t = params.mu;
    for (std::size_t i = 0; i < params.ar.size(); ++i) {
      const double r_lag = (t >= i + 1) ? r[t - i - 1] : params.mu;
      mean_t += params.ar[i] * r_lag;
    }
    for (std::size_t j = 0; j < params.ma.size(); ++j) {
      const double e_lag = (t >= j + 1) ? eps[t - j - 1] : 0.0;
      mean_t += params.ma[j] * e_lag;
    }
    r[t] = mean_t + eps[t];
  }
  return {r.begin() + static_cast<long>(burn), r.end()};
}

GarchFit fit_garch(const std::vector<double>& returns, const GarchSpec& spec,
                   int restarts, std::uint64_t seed) {
  validate_spec(spec);
  const std::size_t n = returns.size();
  if (n < 250) throw data_error("fit_garch needs n >= 250");

  const Transform tf{spec};
  const auto objective = [&](const std::vector<double>& x) -> double {
    const GarchParams p = tf.unpack(x);
    if (companion_spectral_radius(p.ar) >= kMaxPersistence) return kInf;
    if (companion_spectral_radius(p.ma) >= kMaxPersistence) return kInf;
    return -garch_filter(spec, p, returns).loglik;
  };

  const std::vector<double> base = tf.moment_start(returns);
  const double ret_sd = stats::stddev(returns);

  OptimResult best;
  best.fx = kInf;
  auto jitter_rng = RngStream::substream(seed, "garch/fit/" + to_string(spec.kind));
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    std::vector<double> x0 = base;
    if (r > 0) {
      x0[0] += 0.1 * ret_sd * (2.0 * jitter_rng.uniform() - 1.0);
      for (std::size_t i = 1; i <= static_cast<std::size_t>(spec.ar + spec.ma); ++i) {
        x0[i] += 0.3 * (2.0 * jitter_rng.uniform() - 1.0);
      }
      for (std::size_t i = 1 + static_cast<std::size_t>(spec.ar + spec.ma); i < x0.size(); ++i) {
        x0[i] += 0.75 * (2.0 * jitter_rng.uniform() - 1.0);
      }
    }
    if (!std::isfinite(objective(x0))) continue;
    const OptimResult res = minimize(objective, x0);
    if (res.fx < best.fx) best = res;
  }
  if (!std::isfinite(best.fx)) {
    throw numeric_error("fit_garch: no restart reached a finite optimum for " +
                        to_string(spec.kind));
  }

  GarchFit fit;
  fit.spec = spec;
  fit.params = tf.unpack(best.x);
  const FilterOutput filtered = garch_filter(spec, fit.params, returns);
  fit.cond_variance = filtered.cond_variance;
  fit.std_residuals = filtered.std_residuals;
  fit.loglik = filtered.loglik;
  fit.converged = true;

  const double k = static_cast<double>(total_param_count(spec));
  const double dn = static_cast<double>(n);
  fit.criteria.aic = -2.0 * fit.loglik / dn + 2.0 * k / dn;
  fit.criteria.bic = -2.0 * fit.loglik / dn + k * std::log(dn) / dn;
  double mae = 0.0, mse = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double d = std::fabs(returns[t]) - std::sqrt(fit.cond_variance[t]);
    mae += std::fabs(d);
    mse += d * d;
  }
  fit.criteria.mae = mae / dn;
  fit.criteria.rmse = std::sqrt(mse / dn);
  return fit;
}

SelectionResult select_model(const std::vector<double>& returns,
                             const std::vector<GarchSpec>& candidates,
                             int restarts, std::uint64_t seed) {
  if (candidates.empty()) throw config_error("select_model: no candidates");
  SelectionResult out;
  std::vector<GarchFit> fits(candidates.size());
  out.table.resize(candidates.size());

  long best_idx = -1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    SelectionRow& row = out.table[i];
    row.spec = candidates[i];
    try {
      fits[i] = fit_garch(returns, candidates[i], restarts, seed);
      row.fitted = true;
      row.criteria = fits[i].criteria;
      row.loglik = fits[i].loglik;
    } catch (const numeric_error&) {
      row.fitted = false;
      continue;
    }
    if (best_idx < 0) {
      best_idx = static_cast<long>(i);
      continue;
    }
    const GarchCriteria& a = fits[i].criteria;
    const GarchCriteria& b = fits[static_cast<std::size_t>(best_idx)].criteria;
    if (a.aic < b.aic ||
        (a.aic == b.aic && (a.bic < b.bic || (a.bic == b.bic && a.rmse < b.rmse)))) {
      best_idx = static_cast<long>(i);
    }
  }
  if (best_idx < 0) throw numeric_error("select_model: all candidates failed");
  out.table[static_cast<std::size_t>(best_idx)].selected = true;
  out.best = std::move(fits[static_cast<std::size_t>(best_idx)]);
  return out;
}

std::vector<VolForecast> rolling_forecast(const std::vector<double>& returns,
                                          const GarchSpec& spec, std::size_t window,
                                          std::size_t refit_stride, int restarts,
                                          std::uint64_t seed) {
  if (window < 250) throw config_error("rolling_forecast: window must be >= 250");
  if (refit_stride < 1) throw config_error("rolling_forecast: stride must be >= 1");
  if (returns.size() <= window) throw data_error("rolling_forecast: series shorter than window");

  std::vector<VolForecast> out;
  out.reserve(returns.size() - window);
  GarchParams params;
  bool have_params = false;

  for (std::size_t t = window; t < returns.size(); ++t) {
    const std::size_t step = t - window;
    bool flag = false;
    if (step % refit_stride == 0) {
      const std::vector<double> slice(returns.begin() + static_cast<long>(t - window),
                                      returns.begin() + static_cast<long>(t));
      try {
        params = fit_garch(slice, spec, restarts, seed + step).params;
        have_params = true;
      } catch (const numeric_error&) {
        if (!have_params) throw;
        flag = true;  // keep the previous parameter set
      }
    }
    const std::vector<double> slice(returns.begin() + static_cast<long>(t - window),
                                    returns.begin() + static_cast<long>(t));
    const FilterOutput filtered = garch_filter(spec, params, slice);
    VolForecast f = one_step_forecast(spec, params, slice, filtered);
    f.refit_failed = flag;
    out.push_back(f);
  }
  return out;
}

}  // namespace tailrisk
