#include "tailrisk/spillover.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "tailrisk/errors.hpp"

namespace tailrisk {
namespace {

using Eigen::MatrixXd;

MatrixXd to_eigen(const std::vector<std::vector<double>>& m) {
  const auto rows = static_cast<Eigen::Index>(m.size());
  const auto cols = rows > 0 ? static_cast<Eigen::Index>(m[0].size()) : 0;
  MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = m[r][c];
  }
  return out;
}

std::vector<std::vector<double>> from_eigen(const MatrixXd& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

void check_sigma(const VarModel& model) {
  const std::size_t n = model.n_vars;
  if (model.sigma.size() != n) throw config_error("var model: sigma shape mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    if (model.sigma[j].size() != n) throw config_error("var model: sigma shape mismatch");
    for (std::size_t k = 0; k < n; ++k) {
      if (std::abs(model.sigma[j][k] - model.sigma[k][j]) > 1e-10) {
        throw config_error("var model: sigma must be symmetric");
      }
    }
  }
}

// A_0..A_H as Eigen matrices.
std::vector<MatrixXd> ma_weights(const VarModel& model, int horizon) {
  const auto n = static_cast<Eigen::Index>(model.n_vars);
  std::vector<MatrixXd> phi;
  phi.reserve(model.coefficients.size());
  for (const auto& m : model.coefficients) phi.push_back(to_eigen(m));
  std::vector<MatrixXd> a;
  a.reserve(static_cast<std::size_t>(horizon) + 1);
  a.push_back(MatrixXd::Identity(n, n));
  for (int h = 1; h <= horizon; ++h) {
    MatrixXd ah = MatrixXd::Zero(n, n);
    const int top = std::min(h, model.p);
    for (int i = 1; i <= top; ++i) {
      ah += phi[static_cast<std::size_t>(i - 1)] * a[static_cast<std::size_t>(h - i)];
    }
    a.push_back(std::move(ah));
  }
  return a;
}

}  // namespace

bool var_stationary(const VarModel& model) {
  if (model.p == 0) return true;
  const auto n = static_cast<Eigen::Index>(model.n_vars);
  const Eigen::Index np = n * model.p;
  MatrixXd companion = MatrixXd::Zero(np, np);
  for (int i = 0; i < model.p; ++i) {
    companion.block(0, i * n, n, n) = to_eigen(model.coefficients[static_cast<std::size_t>(i)]);
  }
  if (model.p > 1) {
    companion.block(n, 0, np - n, np - n) =
        MatrixXd::Identity(np - n, np - n);
  }
  const auto eigenvalues = companion.eigenvalues();
  double radius = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    radius = std::max(radius, std::abs(eigenvalues(i)));
  }
  return radius < 1.0;
}

VarModel fit_var(const std::vector<ReturnSeries>& returns, int p) {
  if (p < 0) throw config_error("fit_var: lag order must be >= 0");
  const std::size_t n = returns.size();
  if (n == 0) throw data_error("fit_var: no series");
  const std::size_t t_total = returns[0].values.size();
  for (const auto& s : returns) {
    if (s.values.size() != t_total || s.dates != returns[0].dates) {
      throw data_error("fit_var: series are not date aligned");
    }
    for (double v : s.values) {
      if (!std::isfinite(v)) throw data_error("fit_var: non-finite value");
    }
  }
  if (t_total <= n * static_cast<std::size_t>(p) + 10) {
    throw data_error("fit_var: need more than n*p + 10 observations");
  }

  const auto np = static_cast<Eigen::Index>(n) * p;
  const auto t_eff = static_cast<Eigen::Index>(t_total) - p;
  MatrixXd x(t_eff, 1 + np);
  MatrixXd y(t_eff, static_cast<Eigen::Index>(n));
  for (Eigen::Index r = 0; r < t_eff; ++r) {
    const std::size_t t = static_cast<std::size_t>(r) + static_cast<std::size_t>(p);
    x(r, 0) = 1.0;
    for (int lag = 1; lag <= p; ++lag) {
      for (std::size_t k = 0; k < n; ++k) {
        x(r, 1 + (lag - 1) * static_cast<Eigen::Index>(n) + static_cast<Eigen::Index>(k)) =
            returns[k].values[t - static_cast<std::size_t>(lag)];
      }
    }
    for (std::size_t k = 0; k < n; ++k) {
      y(r, static_cast<Eigen::Index>(k)) = returns[k].values[t];
    }
  }

  const Eigen::ColPivHouseholderQR<MatrixXd> qr(x);
  if (qr.rank() < x.cols()) {
    throw data_error("fit_var: rank-deficient regressors");
  }
  const MatrixXd beta = qr.solve(y);  // (1 + np) x n
  const MatrixXd resid = y - x * beta;
  const double denom = static_cast<double>(t_eff) - static_cast<double>(np) - 1.0;
  if (denom <= 0.0) throw data_error("fit_var: too few residual degrees of freedom");
  const MatrixXd sigma = resid.transpose() * resid / denom;

  VarModel model;
  model.p = p;
  model.n_vars = n;
  model.intercept.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    model.intercept[j] = beta(0, static_cast<Eigen::Index>(j));
  }
  model.coefficients.resize(static_cast<std::size_t>(p));
  for (int lag = 1; lag <= p; ++lag) {
    MatrixXd phi(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        phi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
            beta(1 + (lag - 1) * static_cast<Eigen::Index>(n) + static_cast<Eigen::Index>(k),
                 static_cast<Eigen::Index>(j));
      }
    }
    model.coefficients[static_cast<std::size_t>(lag - 1)] = from_eigen(phi);
  }
  model.sigma = from_eigen(sigma);
  model.stationary = var_stationary(model);
  return model;
}

std::vector<std::vector<std::vector<double>>> ma_coefficients(
    const VarModel& model, int horizon) {
  if (horizon < 0) throw config_error("ma_coefficients: horizon must be >= 0");
  check_sigma(model);
  const auto a = ma_weights(model, horizon);
  std::vector<std::vector<std::vector<double>>> out;
  out.reserve(a.size());
  for (const auto& m : a) out.push_back(from_eigen(m));
  return out;
}

SpilloverTable gfevd(const VarModel& model, int horizon) {
  if (horizon < 1) throw config_error("gfevd: horizon must be >= 1");
  check_sigma(model);
  const auto n = static_cast<Eigen::Index>(model.n_vars);
  const MatrixXd sigma = to_eigen(model.sigma);
  const auto a = ma_weights(model, horizon - 1);  // A_0..A_{H-1}

  MatrixXd numerator = MatrixXd::Zero(n, n);
  Eigen::VectorXd denominator = Eigen::VectorXd::Zero(n);
  for (const auto& ah : a) {
    const MatrixXd as = ah * sigma;
    numerator += as.cwiseProduct(as);
    denominator += (as * ah.transpose()).diagonal();
  }

  MatrixXd shares(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(denominator(j) > 0.0)) {
      throw data_error("gfevd: zero forecast variance row");
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!(sigma(k, k) > 0.0)) {
        throw data_error("gfevd: zero innovation variance");
      }
      shares(j, k) = numerator(j, k) / (sigma(k, k) * denominator(j));
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    shares.row(j) /= shares.row(j).sum();
  }

  SpilloverTable table;
  table.horizon = horizon;
  table.matrix = from_eigen(shares);
  table.to_others.assign(model.n_vars, 0.0);
  table.from_others.assign(model.n_vars, 0.0);
  table.to_including_own.assign(model.n_vars, 0.0);
  table.net.assign(model.n_vars, 0.0);
  double off_diagonal = 0.0;
  double grand = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double s = shares(j, k);
      grand += s;
      table.to_including_own[static_cast<std::size_t>(k)] += s;
      if (j != k) {
        off_diagonal += s;
        table.to_others[static_cast<std::size_t>(k)] += s;
        table.from_others[static_cast<std::size_t>(j)] += s;
      }
    }
  }
  table.total_index = 100.0 * off_diagonal / grand;
  for (std::size_t i = 0; i < model.n_vars; ++i) {
    table.net[i] = table.to_others[i] - table.from_others[i];
  }
  return table;
}

std::vector<RollingSpilloverPoint> rolling_spillover(
    const std::vector<ReturnSeries>& returns, int p, int horizon,
    std::size_t window, std::size_t stride) {
  if (returns.empty()) throw data_error("rolling_spillover: no series");
  if (stride == 0) throw config_error("rolling_spillover: stride must be >= 1");
  if (window <= returns.size() * static_cast<std::size_t>(std::max(p, 0)) + 10) {
    throw config_error("rolling_spillover: window must exceed n*p + 10");
  }
  const std::size_t t_total = returns[0].values.size();
  if (t_total < window) {
    throw data_error("rolling_spillover: fewer observations than the window");
  }

  std::vector<RollingSpilloverPoint> out;
  for (std::size_t start = 0; start + window <= t_total; start += stride) {
    std::vector<ReturnSeries> slice(returns.size());
    for (std::size_t k = 0; k < returns.size(); ++k) {
      slice[k].asset_id = returns[k].asset_id;
      slice[k].dates.assign(returns[k].dates.begin() + static_cast<std::ptrdiff_t>(start),
                            returns[k].dates.begin() + static_cast<std::ptrdiff_t>(start + window));
      slice[k].values.assign(returns[k].values.begin() + static_cast<std::ptrdiff_t>(start),
                             returns[k].values.begin() + static_cast<std::ptrdiff_t>(start + window));
    }
    RollingSpilloverPoint point;
    point.date = returns[0].dates[start + window - 1];
    try {
      point.table = gfevd(fit_var(slice, p), horizon);
      point.ok = true;
    } catch (const data_error&) {
      point.ok = false;
    } catch (const numeric_error&) {
      point.ok = false;
    }
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace tailrisk
