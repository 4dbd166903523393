#include "tailrisk/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tailrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const ObjectiveFn& f, const std::vector<double>& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

std::vector<double> central_gradient(const ObjectiveFn& f,
                                     const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> g(n, 0.0);
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = 1e-6 * std::max(1.0, std::fabs(x[i]));
    xp[i] = x[i] + h;
    const double fp = safe_eval(f, xp);
    xp[i] = x[i] - h;
    const double fm = safe_eval(f, xp);
    xp[i] = x[i];
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * h);
    } else if (std::isfinite(fp)) {
      const double f0 = safe_eval(f, x);
      g[i] = std::isfinite(f0) ? (fp - f0) / h : 0.0;
    } else if (std::isfinite(fm)) {
      const double f0 = safe_eval(f, x);
      g[i] = std::isfinite(f0) ? (f0 - fm) / h : 0.0;
    }
  }
  return g;
}

double norm_inf(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

OptimResult nelder_mead(const ObjectiveFn& f, std::vector<double> x0,
                        double step, double tol, int max_iter) {
  const std::size_t n = x0.size();
  OptimResult out;
  if (n == 0) {
    out.converged = true;
    return out;
  }

  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1][i] += step * std::max(1.0, std::fabs(x0[i]));
  }
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = safe_eval(f, simplex[i]);

  std::vector<std::size_t> idx(n + 1);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = idx[0];
    const std::size_t worst = idx[n];
    const std::size_t second = idx[n - 1];

    if (std::isfinite(fv[best]) && std::isfinite(fv[worst]) &&
        fv[worst] - fv[best] <= tol * (1.0 + std::fabs(fv[best]))) {
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == worst) continue;
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k][i];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = centroid[i] + coef * (simplex[worst][i] - centroid[i]);
      }
      return p;
    };

    std::vector<double> xr = blend(-1.0);
    const double fr = safe_eval(f, xr);
    if (fr < fv[best]) {
      std::vector<double> xe = blend(-2.0);
      const double fe = safe_eval(f, xe);
      if (fe < fr) {
        simplex[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        simplex[worst] = std::move(xr);
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = std::move(xr);
      fv[worst] = fr;
      continue;
    }
    std::vector<double> xc = blend(fr < fv[worst] ? -0.5 : 0.5);
    const double fc = safe_eval(f, xc);
    if (fc < std::min(fr, fv[worst])) {
      simplex[worst] = std::move(xc);
      fv[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k <= n; ++k) {
      if (k == best) continue;
      for (std::size_t i = 0; i < n; ++i) {
        simplex[k][i] = simplex[best][i] + 0.5 * (simplex[k][i] - simplex[best][i]);
      }
      fv[k] = safe_eval(f, simplex[k]);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  out.x = simplex[best];
  out.fx = fv[best];
  out.iterations = iter;
  out.converged = iter < max_iter && std::isfinite(out.fx);
  return out;
}

OptimResult bfgs_minimize(const ObjectiveFn& f, std::vector<double> x0,
                          double grad_tol, int max_iter) {
  const std::size_t n = x0.size();
  OptimResult out;
  out.x = x0;
  out.fx = safe_eval(f, x0);
  if (n == 0 || !std::isfinite(out.fx)) {
    out.converged = n == 0 && std::isfinite(out.fx);
    return out;
  }

  // Inverse Hessian approximation, kept dense; dimensions here are small.
  std::vector<double> H(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;

  std::vector<double> x = x0;
  double fx = out.fx;
  std::vector<double> g = central_gradient(f, x);

  int iter = 0;
  for (; iter < max_iter; ++iter) {
    if (norm_inf(g) <= grad_tol * (1.0 + std::fabs(fx))) {
      out.converged = true;
      break;
    }

    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) p[i] -= H[i * n + j] * g[j];
    }
    double slope = std::inner_product(p.begin(), p.end(), g.begin(), 0.0);
    if (!(slope < 0.0)) {
      // Reset to steepest descent when the approximation loses definiteness.
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) H[i * n + j] = (i == j) ? 1.0 : 0.0;
        p[i] = -g[i];
      }
      slope = -std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
      if (!(slope < 0.0)) break;
    }

    double alpha = 1.0;
    double f_new = kInf;
    std::vector<double> x_new(n);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + alpha * p[i];
      f_new = safe_eval(f, x_new);
      if (f_new <= fx + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    std::vector<double> g_new = central_gradient(f, x_new);
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      // H <- (I - rho s y') H (I - rho y s') + rho s s'
      std::vector<double> Hy(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * y[j];
      }
      const double yHy = std::inner_product(y.begin(), y.end(), Hy.begin(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += rho * rho * (sy + yHy) * s[i] * s[j] -
                          rho * (Hy[i] * s[j] + s[i] * Hy[j]);
        }
      }
    }

    const double f_prev = fx;
    x = x_new;
    fx = f_new;
    g = std::move(g_new);
    if (std::fabs(f_prev - fx) <= 1e-12 * (1.0 + std::fabs(fx)) &&
        norm_inf(s) <= 1e-12 * (1.0 + norm_inf(x))) {
      out.converged = true;
      ++iter;
      break;
    }
  }

  out.x = std::move(x);
  out.fx = fx;
  out.iterations = iter;
  if (iter >= max_iter) out.converged = false;
  return out;
}

OptimResult minimize(const ObjectiveFn& f, const std::vector<double>& x0) {
  OptimResult best = bfgs_minimize(f, x0);
  OptimResult polish = nelder_mead(f, best.converged ? best.x : x0, 0.05);
  if (polish.fx < best.fx || !std::isfinite(best.fx)) return polish;
  return best;
}

}  // namespace tailrisk
