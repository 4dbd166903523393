#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tailrisk/copula.hpp"
#include "tailrisk/evt.hpp"
#include "tailrisk/garch.hpp"

namespace tailrisk {

struct AssetSource {
  std::string id;
  std::string path;  // date,close CSV
};

// Normalized pipeline settings. Level lists are sorted ascending and contain
// every level referenced by an (alpha, beta) pair.
struct PipelineConfig {
  std::vector<AssetSource> assets;
  std::vector<std::pair<std::string, std::string>> portfolios;

  std::vector<double> alphas = {0.01, 0.025, 0.05};
  std::vector<std::pair<double, double>> rvar_pairs = {
      {0.01, 0.025}, {0.01, 0.05}, {0.025, 0.05}};

  std::vector<VarianceKind> garch_kinds = {
      VarianceKind::sGARCH, VarianceKind::eGARCH, VarianceKind::gjrGARCH};
  int arma_max = 1;       // candidate ARMA orders run over [0, arma_max]^2
  int garch_restarts = 5;

  std::vector<MarginalFamily> marginal_families = {
      MarginalFamily::BATs, MarginalFamily::GNG, MarginalFamily::Cauchy};
  int bootstrap_reps = 200;
  int marginal_restarts = 3;

  std::vector<CopulaFamily> copula_families = {
      CopulaFamily::Frank, CopulaFamily::Gumbel, CopulaFamily::Joe,
      CopulaFamily::StudentT};

  std::size_t n_sim = 10000;
  std::size_t window = 500;
  std::size_t refit_stride = 10;
  std::string weights = "minvar";  // or "equal"

  bool spillover_enabled = true;
  int spillover_lag = 1;
  int spillover_horizon = 10;
  std::size_t spillover_window = 200;
  std::size_t spillover_stride = 1;

  std::uint64_t seed = 1;
  std::string output_dir = "out";
};

// Parses the flat section/key format and normalizes. Every violation is
// collected; the config_error message lists one "key: reason" line per
// problem. Relative data paths are resolved against base_dir when given.
PipelineConfig parse_config_text(const std::string& text,
                                 const std::string& base_dir = "");

// parse_config_text over the file contents, resolving data paths against the
// config file's directory. Throws config_error when the file is unreadable.
PipelineConfig validate_config(const std::string& path);

// Canonical text form; parse_config_text(serialize_config(c)) reproduces c.
std::string serialize_config(const PipelineConfig& config);

}  // namespace tailrisk
