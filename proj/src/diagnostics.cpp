#include "tailrisk/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "tailrisk/errors.hpp"
#include "tailrisk/stats.hpp"

namespace tailrisk {

namespace {

struct OlsFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd se;   // dof-corrected: s^2 = SSR/(rows - cols)
  double ssr = 0.0;
  Eigen::VectorXd residuals;
};

OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const auto qr = X.colPivHouseholderQr();
  if (qr.rank() < X.cols()) throw numeric_error("singular regression design");
  OlsFit fit;
  fit.beta = qr.solve(y);
  fit.residuals = y - X * fit.beta;
  fit.ssr = fit.residuals.squaredNorm();
  const double s2 =
      fit.ssr / static_cast<double>(X.rows() - X.cols());
  const Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));
  fit.se = (s2 * xtx_inv.diagonal()).cwiseSqrt();
  return fit;
}

void central_moments(const std::vector<double>& x, double& m, double& m2,
                     double& m3, double& m4) {
  const double n = static_cast<double>(x.size());
  m = stats::mean(x);
  m2 = m3 = m4 = 0.0;
  for (double v : x) {
    const double d = v - m;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
}

}  // namespace

MomentSummary summary_stats(const std::vector<double>& x) {
  if (x.size() < 4) throw data_error("summary_stats needs n >= 4");
  double m = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
  central_moments(x, m, m2, m3, m4);
  MomentSummary out;
  out.mean = m;
  out.stddev = stats::stddev(x);
  out.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  out.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
  out.min = *std::min_element(x.begin(), x.end());
  out.max = *std::max_element(x.begin(), x.end());
  return out;
}

TestResult jarque_bera(const std::vector<double>& x) {
  if (x.size() < 8) throw data_error("jarque_bera needs n >= 8");
  const MomentSummary s = summary_stats(x);
  const double n = static_cast<double>(x.size());
  const double jb = n / 6.0 * (s.skewness * s.skewness +
                               0.25 * (s.kurtosis - 3.0) * (s.kurtosis - 3.0));
  return {jb, stats::chisq_sf(jb, 2.0)};
}

double mackinnon_p_value(double tau) {
  // Response-surface polynomial for the intercept-only Dickey-Fuller tau.
  static constexpr double kStar = -1.61;
  static constexpr double kMin = -18.83;
  static constexpr double kMax = 2.74;
  static constexpr double kSmall[] = {2.1659, 1.4412, 0.038269};
  static constexpr double kLarge[] = {1.7339, 0.93202, -0.12745, -0.010368};
  if (tau > kMax) return 1.0;
  if (tau < kMin) return 0.0;
  double z = 0.0;
  double pw = 1.0;
  if (tau <= kStar) {
    for (double c : kSmall) {
      z += c * pw;
      pw *= tau;
    }
  } else {
    for (double c : kLarge) {
      z += c * pw;
      pw *= tau;
    }
  }
  return stats::normal_cdf(z);
}

TestResult adf_test(const std::vector<double>& x, std::optional<int> lags) {
  const int n = static_cast<int>(x.size());
  if (n <= 20) throw data_error("adf_test needs n > 20");
  const int L = lags.value_or(static_cast<int>(
      std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25))));
  if (L < 0 || n - 1 - L <= L + 3) throw data_error("adf_test: too many lags");

  // dy_t = c + rho*y_{t-1} + sum phi_i dy_{t-i}, rows t = L+1 .. n-1.
  const int rows = n - 1 - L;
  const int cols = L + 2;
  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd y(rows);
  for (int r = 0; r < rows; ++r) {
    const int t = L + 1 + r;
    y(r) = x[t] - x[t - 1];
    X(r, 0) = 1.0;
    X(r, 1) = x[t - 1];
    for (int i = 1; i <= L; ++i) X(r, 1 + i) = x[t - i] - x[t - i - 1];
  }
  const OlsFit fit = ols(X, y);
  const double tau = fit.beta(1) / fit.se(1);
  return {tau, mackinnon_p_value(tau)};
}

TestResult pp_test(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  if (n <= 20) throw data_error("pp_test needs n > 20");
  const int T = n - 1;

  Eigen::MatrixXd X(T, 2);
  Eigen::VectorXd y(T);
  for (int t = 0; t < T; ++t) {
    X(t, 0) = 1.0;
    X(t, 1) = x[t];
    y(t) = x[t + 1];
  }
  const OlsFit fit = ols(X, y);
  const double se_rho = fit.se(1);
  const double t_rho = (fit.beta(1) - 1.0) / se_rho;
  const double s2 = fit.ssr / static_cast<double>(T - 2);
  const double s = std::sqrt(s2);

  const int q = static_cast<int>(
      std::floor(4.0 * std::pow(static_cast<double>(T) / 100.0, 2.0 / 9.0)));
  std::vector<double> gamma(static_cast<std::size_t>(q) + 1, 0.0);
  for (int j = 0; j <= q; ++j) {
    double acc = 0.0;
    for (int t = j; t < T; ++t) acc += fit.residuals(t) * fit.residuals(t - j);
    gamma[static_cast<std::size_t>(j)] = acc / static_cast<double>(T);
  }
  double lam2 = gamma[0];
  for (int j = 1; j <= q; ++j) {
    lam2 += 2.0 * (1.0 - static_cast<double>(j) / (q + 1.0)) *
            gamma[static_cast<std::size_t>(j)];
  }
  if (!(lam2 > 0.0)) throw numeric_error("pp_test: nonpositive long-run variance");
  const double lam = std::sqrt(lam2);

  const double z = std::sqrt(gamma[0] / lam2) * t_rho -
                   (lam2 - gamma[0]) / (2.0 * lam) * static_cast<double>(T) *
                       se_rho / s;
  return {z, mackinnon_p_value(z)};
}

TestResult arch_lm(const std::vector<double>& residuals, int lags) {
  const int n = static_cast<int>(residuals.size());
  if (lags < 1) throw data_error("arch_lm needs lags >= 1");
  if (n <= lags + 1) throw data_error("arch_lm needs n > lags + 1");

  std::vector<double> sq(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    sq[i] = residuals[i] * residuals[i];
  }

  const int rows = n - lags;
  Eigen::MatrixXd X(rows, lags + 1);
  Eigen::VectorXd y(rows);
  for (int r = 0; r < rows; ++r) {
    const int t = lags + r;
    y(r) = sq[static_cast<std::size_t>(t)];
    X(r, 0) = 1.0;
    for (int i = 1; i <= lags; ++i) X(r, i) = sq[static_cast<std::size_t>(t - i)];
  }
  const double ybar = y.mean();
  const double sst = (y.array() - ybar).matrix().squaredNorm();
  if (sst <= 1e-300) return {0.0, 1.0};

  double ssr = 0.0;
  try {
    ssr = ols(X, y).ssr;
  } catch (const numeric_error&) {
    return {0.0, 1.0};
  }
  const double r2 = 1.0 - ssr / sst;
  const double lm = static_cast<double>(rows) * r2;
  return {lm, stats::chisq_sf(lm, static_cast<double>(lags))};
}

TestResult ljung_box(const std::vector<double>& x, int lags) {
  const int n = static_cast<int>(x.size());
  if (lags < 1) throw data_error("ljung_box needs lags >= 1");
  if (n <= lags) throw data_error("ljung_box needs n > lags");

  const double m = stats::mean(x);
  double denom = 0.0;
  for (double v : x) denom += (v - m) * (v - m);
  if (denom <= 1e-300) return {0.0, 1.0};

  double q = 0.0;
  for (int k = 1; k <= lags; ++k) {
    double num = 0.0;
    for (int t = k; t < n; ++t) num += (x[static_cast<std::size_t>(t)] - m) *
                                       (x[static_cast<std::size_t>(t - k)] - m);
    const double rk = num / denom;
    q += rk * rk / static_cast<double>(n - k);
  }
  q *= static_cast<double>(n) * (static_cast<double>(n) + 2.0);
  return {q, stats::chisq_sf(q, static_cast<double>(lags))};
}

RankCorrelations rank_correlations(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  if (a.size() != b.size()) throw data_error("rank_correlations: length mismatch");
  const std::size_t n = a.size();
  if (n < 3) throw data_error("rank_correlations needs n >= 3");

  const std::vector<double> ra = stats::average_ranks(a);
  const std::vector<double> rb = stats::average_ranks(b);
  const double ma = stats::mean(ra);
  const double mb = stats::mean(rb);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
    sab += (ra[i] - ma) * (rb[i] - mb);
  }
  if (saa <= 1e-300 || sbb <= 1e-300) {
    throw data_error("rank_correlations: zero rank variance");
  }
  const double spearman = sab / std::sqrt(saa * sbb);

  // Kendall tau-b: pairwise concordance with tie-corrected denominator.
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) continue;
      if (da == 0.0) {
        ++ties_a;
      } else if (db == 0.0) {
        ++ties_b;
      } else if (da * db > 0.0) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double n0 = 0.5 * static_cast<double>(n) * (static_cast<double>(n) - 1.0);
  double n1 = 0.0, n2 = 0.0;
  {
    // tie-group sizes from sorted copies
    std::vector<double> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    auto tie_pairs = [](const std::vector<double>& v) {
      double total = 0.0;
      std::size_t i = 0;
      while (i < v.size()) {
        std::size_t j = i;
        while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        total += 0.5 * t * (t - 1.0);
        i = j + 1;
      }
      return total;
    };
    n1 = tie_pairs(sa);
    n2 = tie_pairs(sb);
  }
  const double denom = std::sqrt((n0 - n1) * (n0 - n2));
  if (denom <= 0.0) throw data_error("rank_correlations: zero rank variance");
  const double kendall =
      (static_cast<double>(concordant) - static_cast<double>(discordant)) / denom;
  return {spearman, kendall};
}

}  // namespace tailrisk
