#include "tailrisk/copula.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "tailrisk/diagnostics.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/optim.hpp"
#include "tailrisk/rng.hpp"
#include "tailrisk/stats.hpp"

namespace tailrisk {

namespace {

constexpr double kIndepEps = 1e-8;  // |theta| below this is independence

double clamp_unit(double u) { return std::clamp(u, 1e-15, 1.0 - 1e-15); }

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 48);
}

// ---- Frank (positive-theta core; negative theta via the rotation
//      C(u,v;-t) = u - C(u,1-v;t)) ----

double frank_cdf_pos(double theta, double u, double v) {
  const double a = std::expm1(-theta * u);
  const double b = std::expm1(-theta * v);
  const double e = std::expm1(-theta);
  return -std::log1p(a * b / e) / theta;
}

double frank_log_density_pos(double theta, double u, double v) {
  const double a = std::expm1(-theta * u);
  const double b = std::expm1(-theta * v);
  const double e = std::expm1(-theta);
  const double denom = e + a * b;
  return std::log(theta * (-e)) - theta * (u + v) - 2.0 * std::log(std::fabs(denom));
}

double frank_h_pos(double theta, double v, double u) {
  const double a = std::expm1(-theta * u);
  const double b = std::expm1(-theta * v);
  const double e = std::expm1(-theta);
  return std::exp(-theta * u) * b / (e + a * b);
}

double frank_hinv_pos(double theta, double p, double u) {
  const double a = std::expm1(-theta * u);
  const double e = std::expm1(-theta);
  const double b = p * e / (1.0 + a * (1.0 - p));
  return -std::log1p(b) / theta;
}

// ---- Gumbel ----

double gumbel_log_density(double theta, double u, double v) {
  const double x = -std::log(u);
  const double y = -std::log(v);
  const double a = 1.0 / theta;
  const double logs = std::log(std::pow(x, theta) + std::pow(y, theta));
  const double sa = std::exp(a * logs);
  return -sa + x + y + (theta - 1.0) * (std::log(x) + std::log(y)) +
         (a - 2.0) * logs + std::log(sa + theta - 1.0);
}

double gumbel_cdf(double theta, double u, double v) {
  const double x = -std::log(u);
  const double y = -std::log(v);
  const double s = std::pow(x, theta) + std::pow(y, theta);
  return std::exp(-std::pow(s, 1.0 / theta));
}

double gumbel_h(double theta, double v, double u) {
  const double x = -std::log(u);
  const double y = -std::log(v);
  const double s = std::pow(x, theta) + std::pow(y, theta);
  const double a = 1.0 / theta;
  return gumbel_cdf(theta, u, v) * std::pow(x, theta - 1.0) * std::pow(s, a - 1.0) / u;
}

// ---- Joe ----

double joe_t(double theta, double u, double v) {
  const double a = std::exp(theta * std::log1p(-u));
  const double b = std::exp(theta * std::log1p(-v));
  return a + b - a * b;
}

double joe_cdf(double theta, double u, double v) {
  return 1.0 - std::pow(joe_t(theta, u, v), 1.0 / theta);
}

double joe_log_density(double theta, double u, double v) {
  const double t = joe_t(theta, u, v);
  return (theta - 1.0) * (std::log1p(-u) + std::log1p(-v)) +
         (1.0 / theta - 2.0) * std::log(t) + std::log(theta - 1.0 + t);
}

double joe_h(double theta, double v, double u) {
  const double b = std::exp(theta * std::log1p(-v));
  const double t = joe_t(theta, u, v);
  return std::exp((theta - 1.0) * std::log1p(-u)) * (1.0 - b) *
         std::pow(t, 1.0 / theta - 1.0);
}

// ---- Student t ----

double tcop_log_density(double theta, double nu, double u, double v) {
  const double x = stats::student_t_quantile(u, nu);
  const double y = stats::student_t_quantile(v, nu);
  const double om = 1.0 - theta * theta;
  const double q = (x * x - 2.0 * theta * x * y + y * y) / (nu * om);
  return boost::math::lgamma((nu + 2.0) / 2.0) + boost::math::lgamma(nu / 2.0) -
         2.0 * boost::math::lgamma((nu + 1.0) / 2.0) - 0.5 * std::log(om) -
         (nu + 2.0) / 2.0 * std::log1p(q) +
         (nu + 1.0) / 2.0 * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
}

double tcop_h(double theta, double nu, double v, double u) {
  const double x = stats::student_t_quantile(u, nu);
  const double y = stats::student_t_quantile(v, nu);
  const double scale = std::sqrt((nu + 1.0) / ((nu + x * x) * (1.0 - theta * theta)));
  return stats::student_t_cdf((y - theta * x) * scale, nu + 1.0);
}

double tcop_hinv(double theta, double nu, double p, double u) {
  const double x = stats::student_t_quantile(u, nu);
  const double w = stats::student_t_quantile(p, nu + 1.0);
  const double y = theta * x + w * std::sqrt((nu + x * x) * (1.0 - theta * theta) / (nu + 1.0));
  return stats::student_t_cdf(y, nu);
}

double tcop_cdf(double theta, double nu, double u, double v) {
  // integrate the conditional CDF over the first coordinate
  const auto f = [&](double t) { return tcop_h(theta, nu, v, clamp_unit(t)); };
  return adaptive_simpson(f, 0.0, u, 1e-12);
}

// generic bracketed bisection for h-inverse when no closed form exists
double hinv_bisect(const CopulaSpec& spec, double p, double u) {
  double lo = 1e-12, hi = 1.0 - 1e-12;
  if (conditional_cdf(spec, lo, u) >= p) return lo;
  if (conditional_cdf(spec, hi, u) <= p) return hi;
  for (int i = 0; i < 100 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (conditional_cdf(spec, mid, u) < p) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Debye function D1(theta) = (1/theta) Int_0^theta t/(e^t - 1) dt, theta > 0
double debye1(double theta) {
  const auto f = [](double t) { return t < 1e-12 ? 1.0 : t / std::expm1(t); };
  return adaptive_simpson(f, 0.0, theta, 1e-13) / theta;
}

double frank_tau(double theta) {
  if (std::fabs(theta) < kIndepEps) return 0.0;
  const double t = std::fabs(theta);
  const double tau = 1.0 - 4.0 / t * (1.0 - debye1(t));
  return theta > 0.0 ? tau : -tau;
}

double joe_tau(double theta) {
  if (theta <= 1.0 + 1e-12) return 0.0;
  // tau = 1 + 4 Int_0^1 phi/phi' dt for the Joe generator
  const auto f = [theta](double t) {
    const double s = std::exp(theta * std::log1p(-t));  // (1-t)^theta
    const double one_minus = -std::expm1(theta * std::log1p(-t));
    if (one_minus <= 0.0 || s <= 0.0) return 0.0;
    return std::log(one_minus) * one_minus / (theta * s / (1.0 - t));
  };
  return 1.0 + 4.0 * adaptive_simpson(f, 1e-12, 1.0 - 1e-12, 1e-12);
}

double tcop_tail_dependence(double theta, double nu) {
  return 2.0 * stats::student_t_cdf(
                   -std::sqrt((nu + 1.0) * (1.0 - theta) / (1.0 + theta)), nu + 1.0);
}

double invert_tau_monotone(const std::function<double(double)>& tau_of, double lo,
                           double hi, double target) {
  if (tau_of(lo) >= target) return lo;
  if (tau_of(hi) <= target) return hi;
  for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (tau_of(mid) < target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct CopulaTransform {
  CopulaFamily family;

  std::size_t dim() const { return family == CopulaFamily::StudentT ? 2 : 1; }

  CopulaSpec unpack(const std::vector<double>& x) const {
    CopulaSpec s;
    s.family = family;
    switch (family) {
      case CopulaFamily::Frank:
        s.theta = std::clamp(x[0], -50.0, 50.0);
        break;
      case CopulaFamily::Gumbel:
      case CopulaFamily::Joe:
        s.theta = 1.0 + std::exp(std::clamp(x[0], -40.0, 4.0));
        break;
      case CopulaFamily::StudentT:
        // tanh saturates to exactly 1.0 in doubles near |x| ~ 19
        s.theta = std::clamp(std::tanh(x[0]), -1.0 + 1e-12, 1.0 - 1e-12);
        s.nu = 2.0 + std::exp(std::clamp(x[1], -10.0, 14.0));
        break;
    }
    return s;
  }

  std::vector<double> pack_start(double tau_hat) const {
    switch (family) {
      case CopulaFamily::Frank: {
        const double a = std::fabs(tau_hat);
        if (a < 1e-4) return {tau_hat >= 0.0 ? 0.05 : -0.05};
        const double t = invert_tau_monotone(frank_tau, 1e-4, 50.0, a);
        return {tau_hat > 0.0 ? t : -t};
      }
      case CopulaFamily::Gumbel: {
        const double theta = std::clamp(1.0 / std::max(1.0 - tau_hat, 1e-3), 1.001, 40.0);
        return {std::log(theta - 1.0)};
      }
      case CopulaFamily::Joe: {
        if (tau_hat <= 1e-4) return {std::log(0.01)};
        const double theta = invert_tau_monotone(joe_tau, 1.0 + 1e-6, 50.0, tau_hat);
        return {std::log(std::max(theta - 1.0, 1e-6))};
      }
      case CopulaFamily::StudentT: {
        const double theta = std::clamp(std::sin(M_PI * tau_hat / 2.0), -0.99, 0.99);
        return {std::atanh(theta), std::log(8.0 - 2.0)};
      }
    }
    throw numeric_error("unreachable copula family");
  }
};

// observed-information standard errors by finite differences in natural space
std::vector<double> wald_standard_errors(const CopulaSpec& spec,
                                         const std::function<double(const CopulaSpec&)>& negll) {
  auto eval_theta = [&](double theta) {
    CopulaSpec s = spec;
    s.theta = theta;
    return negll(s);
  };
  const bool bounded_below =
      spec.family == CopulaFamily::Gumbel || spec.family == CopulaFamily::Joe;
  const double ht = 1e-4 * std::max(1.0, std::fabs(spec.theta));

  if (spec.family != CopulaFamily::StudentT) {
    double d2;
    if (bounded_below && spec.theta - ht <= 1.0) {
      d2 = (eval_theta(spec.theta + 2.0 * ht) - 2.0 * eval_theta(spec.theta + ht) +
            eval_theta(spec.theta)) /
           (ht * ht);
    } else {
      d2 = (eval_theta(spec.theta + ht) - 2.0 * eval_theta(spec.theta) +
            eval_theta(spec.theta - ht)) /
           (ht * ht);
    }
    return {d2 > 0.0 ? 1.0 / std::sqrt(d2)
                     : std::numeric_limits<double>::quiet_NaN()};
  }

  const double hn = 1e-3 * std::max(1.0, spec.nu);
  auto eval = [&](double theta, double nu) {
    CopulaSpec s = spec;
    s.theta = std::clamp(theta, -1.0 + 1e-10, 1.0 - 1e-10);
    s.nu = std::max(nu, 2.0 + 1e-8);
    return negll(s);
  };
  const double f0 = eval(spec.theta, spec.nu);
  const double ftt = (eval(spec.theta + ht, spec.nu) - 2.0 * f0 +
                      eval(spec.theta - ht, spec.nu)) /
                     (ht * ht);
  const double fnn = (eval(spec.theta, spec.nu + hn) - 2.0 * f0 +
                      eval(spec.theta, spec.nu - hn)) /
                     (hn * hn);
  const double ftn = (eval(spec.theta + ht, spec.nu + hn) - eval(spec.theta + ht, spec.nu - hn) -
                      eval(spec.theta - ht, spec.nu + hn) + eval(spec.theta - ht, spec.nu - hn)) /
                     (4.0 * ht * hn);
  const double det = ftt * fnn - ftn * ftn;
  if (det > 0.0 && ftt > 0.0) {
    return {std::sqrt(fnn / det), std::sqrt(ftt / det)};
  }
  return {std::numeric_limits<double>::quiet_NaN(),
          std::numeric_limits<double>::quiet_NaN()};
}

}  // namespace

std::string to_string(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::Frank: return "Frank";
    case CopulaFamily::Gumbel: return "Gumbel";
    case CopulaFamily::Joe: return "Joe";
    case CopulaFamily::StudentT: return "StudentT";
  }
  return "?";
}

CopulaFamily copula_family_from_string(const std::string& name) {
  if (name == "Frank") return CopulaFamily::Frank;
  if (name == "Gumbel") return CopulaFamily::Gumbel;
  if (name == "Joe") return CopulaFamily::Joe;
  if (name == "StudentT") return CopulaFamily::StudentT;
  throw config_error("unknown copula family: " + name);
}

void validate_copula_spec(const CopulaSpec& spec) {
  if (!std::isfinite(spec.theta)) throw config_error("copula theta must be finite");
  switch (spec.family) {
    case CopulaFamily::Frank:
      return;
    case CopulaFamily::Gumbel:
    case CopulaFamily::Joe:
      if (spec.theta < 1.0) {
        throw config_error(to_string(spec.family) + " copula needs theta >= 1");
      }
      return;
    case CopulaFamily::StudentT:
      if (!(spec.theta > -1.0 && spec.theta < 1.0)) {
        throw config_error("StudentT copula needs theta in (-1,1)");
      }
      if (!(spec.nu > 2.0)) throw config_error("StudentT copula needs nu > 2");
      return;
  }
}

double copula_cdf(const CopulaSpec& spec, double u1, double u2) {
  validate_copula_spec(spec);
  if (u1 <= 0.0 || u2 <= 0.0) return 0.0;
  if (u1 >= 1.0 && u2 >= 1.0) return 1.0;
  if (u1 >= 1.0) return u2;
  if (u2 >= 1.0) return u1;
  switch (spec.family) {
    case CopulaFamily::Frank:
      if (std::fabs(spec.theta) < kIndepEps) return u1 * u2;
      if (spec.theta > 0.0) return frank_cdf_pos(spec.theta, u1, u2);
      return u1 - frank_cdf_pos(-spec.theta, u1, 1.0 - u2);
    case CopulaFamily::Gumbel:
      if (spec.theta <= 1.0 + 1e-12) return u1 * u2;
      return gumbel_cdf(spec.theta, u1, u2);
    case CopulaFamily::Joe:
      if (spec.theta <= 1.0 + 1e-12) return u1 * u2;
      return joe_cdf(spec.theta, u1, u2);
    case CopulaFamily::StudentT:
      return tcop_cdf(spec.theta, spec.nu, u1, u2);
  }
  throw numeric_error("unreachable copula family");
}

double copula_log_density(const CopulaSpec& spec, double u1, double u2) {
  validate_copula_spec(spec);
  const double u = clamp_unit(u1);
  const double v = clamp_unit(u2);
  switch (spec.family) {
    case CopulaFamily::Frank:
      if (std::fabs(spec.theta) < kIndepEps) return 0.0;
      if (spec.theta > 0.0) return frank_log_density_pos(spec.theta, u, v);
      return frank_log_density_pos(-spec.theta, u, 1.0 - v);
    case CopulaFamily::Gumbel:
      if (spec.theta <= 1.0 + 1e-12) return 0.0;
      return gumbel_log_density(spec.theta, u, v);
    case CopulaFamily::Joe:
      if (spec.theta <= 1.0 + 1e-12) return 0.0;
      return joe_log_density(spec.theta, u, v);
    case CopulaFamily::StudentT:
      return tcop_log_density(spec.theta, spec.nu, u, v);
  }
  throw numeric_error("unreachable copula family");
}

double copula_density(const CopulaSpec& spec, double u1, double u2) {
  return std::exp(copula_log_density(spec, u1, u2));
}

double conditional_cdf(const CopulaSpec& spec, double u2, double u1) {
  validate_copula_spec(spec);
  const double u = clamp_unit(u1);
  if (u2 <= 0.0) return 0.0;
  if (u2 >= 1.0) return 1.0;
  switch (spec.family) {
    case CopulaFamily::Frank:
      if (std::fabs(spec.theta) < kIndepEps) return u2;
      if (spec.theta > 0.0) return frank_h_pos(spec.theta, u2, u);
      return 1.0 - frank_h_pos(-spec.theta, 1.0 - u2, u);
    case CopulaFamily::Gumbel:
      if (spec.theta <= 1.0 + 1e-12) return u2;
      return gumbel_h(spec.theta, u2, u);
    case CopulaFamily::Joe:
      if (spec.theta <= 1.0 + 1e-12) return u2;
      return joe_h(spec.theta, u2, u);
    case CopulaFamily::StudentT:
      return tcop_h(spec.theta, spec.nu, u2, u);
  }
  throw numeric_error("unreachable copula family");
}

double conditional_quantile(const CopulaSpec& spec, double v, double u1) {
  validate_copula_spec(spec);
  const double u = clamp_unit(u1);
  const double p = clamp_unit(v);
  switch (spec.family) {
    case CopulaFamily::Frank:
      if (std::fabs(spec.theta) < kIndepEps) return p;
      if (spec.theta > 0.0) return frank_hinv_pos(spec.theta, p, u);
      return 1.0 - frank_hinv_pos(-spec.theta, 1.0 - p, u);
    case CopulaFamily::Gumbel:
    case CopulaFamily::Joe:
      if (spec.theta <= 1.0 + 1e-12) return p;
      return hinv_bisect(spec, p, u);
    case CopulaFamily::StudentT:
      return tcop_hinv(spec.theta, spec.nu, p, u);
  }
  throw numeric_error("unreachable copula family");
}

std::vector<std::pair<double, double>> conditional_sample(const CopulaSpec& spec,
                                                          std::size_t n,
                                                          std::uint64_t seed) {
  validate_copula_spec(spec);
  auto rng = RngStream::substream(seed, "copula/sample/" + to_string(spec.family));
  std::vector<std::pair<double, double>> out(n);
  for (auto& pair : out) {
    const double u1 = rng.uniform();
    const double v = rng.uniform();
    pair = {u1, conditional_quantile(spec, v, u1)};
  }
  return out;
}

DependenceSummary dependence_summary(const CopulaSpec& spec) {
  validate_copula_spec(spec);
  DependenceSummary s;
  switch (spec.family) {
    case CopulaFamily::Frank:
      s.kendall_tau = frank_tau(spec.theta);
      break;
    case CopulaFamily::Gumbel:
      s.kendall_tau = 1.0 - 1.0 / spec.theta;
      s.tail_upper = 2.0 - std::exp(std::log(2.0) / spec.theta);
      break;
    case CopulaFamily::Joe:
      s.kendall_tau = joe_tau(spec.theta);
      s.tail_upper = 2.0 - std::exp(std::log(2.0) / spec.theta);
      break;
    case CopulaFamily::StudentT:
      s.kendall_tau = 2.0 / M_PI * std::asin(spec.theta);
      s.tail_lower = tcop_tail_dependence(spec.theta, spec.nu);
      s.tail_upper = s.tail_lower;
      break;
  }
  return s;
}

CopulaFit fit_copula(const std::vector<std::pair<double, double>>& pseudo_obs,
                     CopulaFamily family) {
  const std::size_t n = pseudo_obs.size();
  if (n < 100) throw data_error("fit_copula needs n >= 100");
  for (const auto& [u, v] : pseudo_obs) {
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
      throw data_error("fit_copula needs pseudo-observations strictly inside (0,1)");
    }
  }

  // Kendall tau start on a stride subsample (the exact statistic is O(n^2))
  const std::size_t cap = 5000;
  const std::size_t stride = n > cap ? (n + cap - 1) / cap : 1;
  std::vector<double> us, vs;
  us.reserve(n / stride + 1);
  vs.reserve(n / stride + 1);
  for (std::size_t i = 0; i < n; i += stride) {
    us.push_back(pseudo_obs[i].first);
    vs.push_back(pseudo_obs[i].second);
  }
  const double tau_hat = rank_correlations(us, vs).kendall;

  const CopulaTransform transform{family};
  const auto negll = [&](const CopulaSpec& s) {
    double acc = 0.0;
    for (const auto& [u, v] : pseudo_obs) acc -= copula_log_density(s, u, v);
    return acc;
  };
  const auto objective = [&](const std::vector<double>& x) {
    return negll(transform.unpack(x));
  };

  const OptimResult res = minimize(objective, transform.pack_start(tau_hat));
  if (!std::isfinite(res.fx)) throw numeric_error("fit_copula failed to converge");

  CopulaFit fit;
  fit.spec = transform.unpack(res.x);
  fit.loglik = -res.fx;
  fit.n = n;
  fit.standard_error = wald_standard_errors(fit.spec, negll);
  return fit;
}

}  // namespace tailrisk
