#include "tailrisk/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tailrisk/copula.hpp"
#include "tailrisk/diagnostics.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/evt.hpp"
#include "tailrisk/garch.hpp"
#include "tailrisk/risk.hpp"
#include "tailrisk/rng.hpp"
#include "tailrisk/series.hpp"
#include "tailrisk/spillover.hpp"
#include "tailrisk/stats.hpp"

namespace tailrisk {

namespace {

using nlohmann::json;

constexpr int kArchLmLags = 5;
constexpr int kLjungBoxLags = 10;

std::string fmt_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string level_label(double alpha) { return fmt_g(alpha * 100.0) + "%"; }

std::string pair_label(const std::pair<double, double>& pr) {
  return level_label(pr.first) + "-" + level_label(pr.second);
}

std::string spec_label(const GarchSpec& s) {
  return "ARMA(" + std::to_string(s.ar) + "," + std::to_string(s.ma) + ")-" +
         to_string(s.kind) + "(" + std::to_string(s.arch_order) + "," +
         std::to_string(s.garch_lags) + ")";
}

json test_json(const TestResult& t) {
  return json{{"stat", t.statistic}, {"p", t.p_value}};
}

json params_json(const MarginalParams& params) {
  struct Visitor {
    json operator()(const BatsParams& p) const {
      return json{{"kappa0", p.kappa0}, {"tau0", p.tau0}, {"phi0", p.phi0},
                  {"kappa1", p.kappa1}, {"tau1", p.tau1}, {"phi1", p.phi1},
                  {"nu", p.nu}};
    }
    json operator()(const GngParams& p) const {
      return json{{"mu", p.mu},       {"sigma", p.sigma}, {"u_lo", p.u_lo},
                  {"xi_lo", p.xi_lo}, {"phi_lo", p.phi_lo}, {"u_hi", p.u_hi},
                  {"xi_hi", p.xi_hi}, {"phi_hi", p.phi_hi}};
    }
    json operator()(const CauchyParams& p) const {
      return json{{"x0", p.x0}, {"delta", p.delta}};
    }
  };
  return std::visit(Visitor{}, params);
}

struct PortfolioContext {
  std::string name;  // "a+b"
  std::size_t idx_a = 0;
  std::size_t idx_b = 0;
  PortfolioSpec spec;
  std::vector<CopulaFit> copulas;  // config family order
};

struct PipelineState {
  std::vector<ReturnSeries> returns;                // per asset, aligned
  std::vector<SelectionResult> selections;          // per asset
  std::vector<std::vector<VolForecast>> forecasts;  // per asset, [window, n)
  std::vector<std::vector<double>> residuals;       // initial-window fit, per asset
  std::vector<std::vector<MarginalFit>> marginals;  // ranked per asset
  std::vector<PortfolioContext> portfolios;
  std::vector<std::string> warnings;
};

class OutputWriter {
 public:
  OutputWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open for writing: " + path.string());
    out << content;
    out.flush();
    if (!out) throw data_error("write failed: " + path.string());
    names_.push_back(name);
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

std::vector<GarchSpec> candidate_specs(const PipelineConfig& c) {
  std::vector<GarchSpec> out;
  for (const auto kind : c.garch_kinds) {
    for (int p = 0; p <= c.arma_max; ++p) {
      for (int q = 0; q <= c.arma_max; ++q) {
        out.push_back({kind, p, q, 1, 1});
      }
    }
  }
  return out;
}

double covariance(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = stats::mean(a);
  const double mb = stats::mean(b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - ma) * (b[i] - mb);
  return acc / (static_cast<double>(a.size()) - 1.0);
}

void stage_ingest(const PipelineConfig& c, PipelineState& s) {
  std::vector<PriceSeries> prices;
  prices.reserve(c.assets.size());
  for (const auto& asset : c.assets) {
    prices.push_back(load_price_csv(asset.path, asset.id));
  }
  if (prices.size() >= 2) prices = align_calendars(prices);
  for (const auto& p : prices) s.returns.push_back(log_returns(p));
}

void stage_diagnostics(const PipelineConfig&, PipelineState& s,
                       OutputWriter& out) {
  json root = json::object();
  for (const auto& r : s.returns) {
    const MomentSummary m = summary_stats(r.values);
    json d;
    d["mean"] = m.mean;
    d["std"] = m.stddev;
    d["skew"] = m.skewness;
    d["kurt"] = m.kurtosis;
    d["jb"] = test_json(jarque_bera(r.values));
    d["adf"] = test_json(adf_test(r.values));
    d["pp"] = test_json(pp_test(r.values));
    d["arch_lm"] = test_json(arch_lm(r.values, kArchLmLags));
    d["ljung_box"] = test_json(ljung_box(r.values, kLjungBoxLags));
    root[r.asset_id] = std::move(d);
  }
  out.write("diagnostics.json", root.dump(2) + "\n");
}

void stage_garch(const PipelineConfig& c, PipelineState& s, OutputWriter& out) {
  const auto candidates = candidate_specs(c);
  std::ostringstream csv;
  csv << "asset,model,aic,bic,mae,rmse,loglik,selected\n";
  for (const auto& r : s.returns) {
    if (r.values.size() <= c.window) {
      throw data_error("asset " + r.asset_id + ": " +
                       std::to_string(r.values.size()) +
                       " returns do not exceed the estimation window of " +
                       std::to_string(c.window));
    }
    const std::vector<double> initial(r.values.begin(),
                                      r.values.begin() + static_cast<long>(c.window));
    SelectionResult sel =
        select_model(initial, candidates, c.garch_restarts,
                     RngStream::derive_seed(c.seed, "garch/select/" + r.asset_id));
    for (const auto& row : sel.table) {
      csv << r.asset_id << ',' << spec_label(row.spec) << ',';
      if (row.fitted) {
        csv << fmt_g(row.criteria.aic) << ',' << fmt_g(row.criteria.bic) << ','
            << fmt_g(row.criteria.mae) << ',' << fmt_g(row.criteria.rmse) << ','
            << fmt_g(row.loglik);
      } else {
        csv << ",,,,";
      }
      csv << ',' << (row.selected ? 1 : 0) << '\n';
    }

    auto forecasts =
        rolling_forecast(r.values, sel.best.spec, c.window, c.refit_stride,
                         c.garch_restarts,
                         RngStream::derive_seed(c.seed, "garch/roll/" + r.asset_id));
    const auto carried = std::count_if(forecasts.begin(), forecasts.end(),
                                       [](const VolForecast& f) { return f.refit_failed; });
    if (carried > 0) {
      s.warnings.push_back("garch: " + r.asset_id + ": " +
                           std::to_string(carried) +
                           " refits carried previous parameters");
    }
    s.residuals.push_back(sel.best.std_residuals);
    s.forecasts.push_back(std::move(forecasts));
    s.selections.push_back(std::move(sel));
  }
  out.write("garch_selection.csv", csv.str());
}

void stage_marginals(const PipelineConfig& c, PipelineState& s,
                     OutputWriter& out) {
  json root = json::object();
  for (std::size_t i = 0; i < s.returns.size(); ++i) {
    const std::string& id = s.returns[i].asset_id;
    auto ranked =
        compare_marginals(s.residuals[i], c.marginal_families, c.bootstrap_reps,
                          RngStream::derive_seed(c.seed, "marginals/" + id),
                          c.marginal_restarts);
    if (ranked.size() < c.marginal_families.size()) {
      s.warnings.push_back(
          "marginals: " + id + ": " +
          std::to_string(c.marginal_families.size() - ranked.size()) +
          " of " + std::to_string(c.marginal_families.size()) +
          " families failed to fit");
    }
    json arr = json::array();
    for (const auto& fit : ranked) {
      json j;
      j["family"] = to_string(fit.family);
      j["params"] = params_json(fit.params);
      j["loglik"] = fit.loglik;
      j["bic"] = fit.bic;
      j["cvm"] = test_json(fit.cvm);
      j["ad"] = test_json(fit.ad);
      arr.push_back(std::move(j));
    }
    root[id] = std::move(arr);
    s.marginals.push_back(std::move(ranked));
  }
  out.write("marginals.json", root.dump(2) + "\n");
}

std::size_t asset_index(const PipelineState& s, const std::string& id) {
  for (std::size_t i = 0; i < s.returns.size(); ++i) {
    if (s.returns[i].asset_id == id) return i;
  }
  throw config_error("portfolio references unknown asset " + id);
}

void stage_copulas(const PipelineConfig& c, PipelineState& s,
                   OutputWriter& out) {
  json root = json::object();
  for (const auto& [a_id, b_id] : c.portfolios) {
    PortfolioContext ctx;
    ctx.idx_a = asset_index(s, a_id);
    ctx.idx_b = asset_index(s, b_id);
    ctx.name = a_id + "+" + b_id;

    const auto u_a =
        pit_transform(s.residuals[ctx.idx_a], s.marginals[ctx.idx_a].front());
    const auto u_b =
        pit_transform(s.residuals[ctx.idx_b], s.marginals[ctx.idx_b].front());
    std::vector<std::pair<double, double>> pseudo(u_a.size());
    for (std::size_t i = 0; i < u_a.size(); ++i) pseudo[i] = {u_a[i], u_b[i]};

    json arr = json::array();
    for (const auto family : c.copula_families) {
      CopulaFit fit = fit_copula(pseudo, family);
      json j;
      j["family"] = to_string(family);
      j["theta"] = fit.spec.theta;
      if (family == CopulaFamily::StudentT) j["nu"] = fit.spec.nu;
      j["loglik"] = fit.loglik;
      j["se"] = fit.standard_error;
      j["n"] = fit.n;
      arr.push_back(std::move(j));
      ctx.copulas.push_back(std::move(fit));
    }
    root[ctx.name] = std::move(arr);
    s.portfolios.push_back(std::move(ctx));
  }
  out.write("copulas.json", root.dump(2) + "\n");
}

void stage_risk(const PipelineConfig& c, PipelineState& s, OutputWriter& out) {
  const RiskLevelGrid grid{c.alphas, c.rvar_pairs};
  std::vector<RiskMethod> methods = {RiskMethod::HS, RiskMethod::ParametricT};
  for (const auto family : c.copula_families) methods.push_back(method_for(family));

  std::ostringstream measures_csv, scores_csv, lr_csv;
  measures_csv << "portfolio,measure,level";
  scores_csv << "portfolio,score,level";
  for (const auto m : methods) {
    measures_csv << ',' << to_string(m);
    scores_csv << ',' << to_string(m);
  }
  measures_csv << '\n';
  scores_csv << '\n';
  lr_csv << "portfolio,measure,level,LR\n";

  const auto candidates = candidate_specs(c);
  for (auto& ctx : s.portfolios) {
    const auto& ra = s.returns[ctx.idx_a];
    const auto& rb = s.returns[ctx.idx_b];

    double w1 = 0.5;
    if (c.weights == "minvar") {
      const std::vector<double> a0(ra.values.begin(),
                                   ra.values.begin() + static_cast<long>(c.window));
      const std::vector<double> b0(rb.values.begin(),
                                   rb.values.begin() + static_cast<long>(c.window));
      w1 = min_variance_weights(stats::variance(a0), stats::variance(b0),
                                covariance(a0, b0))
               .first;
    }
    ctx.spec = PortfolioSpec{ra.asset_id, rb.asset_id, w1, 1.0 - w1};
    const ReturnSeries series = portfolio_returns(ra, rb, ctx.spec);
    const auto& pv = series.values;

    const std::vector<double> initial(pv.begin(),
                                      pv.begin() + static_cast<long>(c.window));
    const SelectionResult psel =
        select_model(initial, candidates, c.garch_restarts,
                     RngStream::derive_seed(c.seed, "garch/select/" + ctx.name));
    const auto pfc =
        rolling_forecast(pv, psel.best.spec, c.window, c.refit_stride,
                         c.garch_restarts,
                         RngStream::derive_seed(c.seed, "garch/roll/" + ctx.name));

    const std::size_t days = pv.size() - c.window;
    const std::vector<double> realized(pv.begin() + static_cast<long>(c.window),
                                       pv.end());

    std::vector<std::vector<RiskEstimate>> per_method(methods.size());
    for (auto& v : per_method) v.reserve(days);

    // historical simulation on the sliding portfolio window
    for (std::size_t t = 0; t < days; ++t) {
      const std::vector<double> slice(pv.begin() + static_cast<long>(t),
                                      pv.begin() + static_cast<long>(t + c.window));
      per_method[0].push_back(estimate_from_sample(slice, grid, RiskMethod::HS));
    }
    // parametric t on the portfolio-level volatility forecasts
    for (std::size_t t = 0; t < days; ++t) {
      per_method[1].push_back(
          estimate_parametric_t(pfc[t].mu, pfc[t].sigma, pfc[t].nu, grid));
    }
    // copula Monte Carlo: one innovation panel per family, rescaled per date
    for (std::size_t fi = 0; fi < c.copula_families.size(); ++fi) {
      const auto family = c.copula_families[fi];
      const auto draws = joint_innovation_draws(
          s.marginals[ctx.idx_a].front().params,
          s.marginals[ctx.idx_b].front().params, ctx.copulas[fi].spec, c.n_sim,
          RngStream::derive_seed(c.seed,
                                 "mcs/" + ctx.name + "/" + to_string(family)));
      const auto& fa = s.forecasts[ctx.idx_a];
      const auto& fb = s.forecasts[ctx.idx_b];
      for (std::size_t t = 0; t < days; ++t) {
        per_method[2 + fi].push_back(mcs_risk_from_draws(
            draws.first, draws.second, fa[t].mu, fa[t].sigma, fb[t].mu,
            fb[t].sigma, ctx.spec, grid, method_for(family)));
      }
    }

    // Table rows: per-level averages over the evaluation days
    const double inv_days = 1.0 / static_cast<double>(days);
    auto mean_of = [&](std::size_t mi, auto select) {
      double acc = 0.0;
      for (std::size_t t = 0; t < days; ++t) acc += select(per_method[mi][t]);
      return acc * inv_days;
    };
    for (std::size_t ai = 0; ai < grid.alphas.size(); ++ai) {
      measures_csv << ctx.name << ",VaR," << level_label(grid.alphas[ai]);
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        measures_csv << ',' << fmt_g(mean_of(mi, [&](const RiskEstimate& e) {
                       return e.var_values[ai];
                     }));
      }
      measures_csv << '\n';
    }
    for (std::size_t ai = 0; ai < grid.alphas.size(); ++ai) {
      measures_csv << ctx.name << ",ES," << level_label(grid.alphas[ai]);
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        measures_csv << ',' << fmt_g(mean_of(mi, [&](const RiskEstimate& e) {
                       return e.es_values[ai];
                     }));
      }
      measures_csv << '\n';
    }
    for (std::size_t pi = 0; pi < grid.rvar_pairs.size(); ++pi) {
      measures_csv << ctx.name << ",RVaR," << pair_label(grid.rvar_pairs[pi]);
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        measures_csv << ',' << fmt_g(mean_of(mi, [&](const RiskEstimate& e) {
                       return e.rvar_values[pi];
                     }));
      }
      measures_csv << '\n';
    }

    // scoring and cross-method dispersion
    std::vector<MethodForecasts> mf(methods.size());
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      mf[mi].method = methods[mi];
      mf[mi].var_forecasts.resize(days);
      mf[mi].es_forecasts.resize(days);
      mf[mi].rvar_forecasts.resize(days);
      for (std::size_t t = 0; t < days; ++t) {
        mf[mi].var_forecasts[t] = per_method[mi][t].var_values;
        mf[mi].es_forecasts[t] = per_method[mi][t].es_values;
        mf[mi].rvar_forecasts[t] = per_method[mi][t].rvar_values;
      }
    }
    const EvaluationResult eval = evaluate_methods(realized, mf, grid);
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      if (eval.scores[mi].es_clamped) {
        s.warnings.push_back("risk: " + ctx.name + ": " +
                             to_string(methods[mi]) +
                             " ES score hit the exponential-link clamp");
      }
    }

    for (std::size_t ai = 0; ai < grid.alphas.size(); ++ai) {
      scores_csv << ctx.name << ",S_VaR," << level_label(grid.alphas[ai]);
      for (const auto& rep : eval.scores) scores_csv << ',' << fmt_g(rep.var_scores[ai]);
      scores_csv << '\n';
    }
    for (std::size_t ai = 0; ai < grid.alphas.size(); ++ai) {
      scores_csv << ctx.name << ",S_ES," << level_label(grid.alphas[ai]);
      for (const auto& rep : eval.scores) scores_csv << ',' << fmt_g(rep.es_scores[ai]);
      scores_csv << '\n';
    }
    for (std::size_t pi = 0; pi < grid.rvar_pairs.size(); ++pi) {
      scores_csv << ctx.name << ",S_RVaR," << pair_label(grid.rvar_pairs[pi]);
      for (const auto& rep : eval.scores) scores_csv << ',' << fmt_g(rep.rvar_scores[pi]);
      scores_csv << '\n';
    }

    for (std::size_t ai = 0; ai < grid.alphas.size(); ++ai) {
      lr_csv << ctx.name << ",VaR," << level_label(grid.alphas[ai]) << ','
             << fmt_g(eval.var_lr[ai]) << '\n';
    }
    for (std::size_t ai = 0; ai < grid.alphas.size(); ++ai) {
      lr_csv << ctx.name << ",ES," << level_label(grid.alphas[ai]) << ','
             << fmt_g(eval.es_lr[ai]) << '\n';
    }
    for (std::size_t pi = 0; pi < grid.rvar_pairs.size(); ++pi) {
      lr_csv << ctx.name << ",RVaR," << pair_label(grid.rvar_pairs[pi]) << ','
             << fmt_g(eval.rvar_lr[pi]) << '\n';
    }
  }

  out.write("risk_measures.csv", measures_csv.str());
  out.write("scores.csv", scores_csv.str());
  out.write("legal_robustness.csv", lr_csv.str());
}

void stage_spillover(const PipelineConfig& c, PipelineState& s,
                     OutputWriter& out) {
  const VarModel model = fit_var(s.returns, c.spillover_lag);
  if (!model.stationary) {
    s.warnings.push_back(
        "spillover: full-sample VAR companion spectral radius >= 1");
  }
  const SpilloverTable table = gfevd(model, c.spillover_horizon);
  const std::size_t n = s.returns.size();

  // Connectedness table in percentage points: share matrix with a
  // "From others" margin, directional "To others" rows, and the total cell.
  std::ostringstream csv;
  csv << "variable";
  for (const auto& r : s.returns) csv << ',' << r.asset_id;
  csv << ",From others\n";
  for (std::size_t j = 0; j < n; ++j) {
    csv << s.returns[j].asset_id;
    for (std::size_t k = 0; k < n; ++k) csv << ',' << fmt_g(table.matrix[j][k] * 100.0);
    csv << ',' << fmt_g(table.from_others[j] * 100.0) << '\n';
  }
  csv << "To others";
  for (std::size_t k = 0; k < n; ++k) csv << ',' << fmt_g(table.to_others[k] * 100.0);
  csv << ",\n";
  csv << "To others including own";
  for (std::size_t k = 0; k < n; ++k) {
    csv << ',' << fmt_g(table.to_including_own[k] * 100.0);
  }
  csv << ",\n";
  csv << "Total spillover index," << fmt_g(table.total_index) << '%';
  for (std::size_t k = 0; k < n; ++k) csv << ',';
  csv << '\n';
  out.write("spillover.csv", csv.str());

  const auto rolling =
      rolling_spillover(s.returns, c.spillover_lag, c.spillover_horizon,
                        c.spillover_window, c.spillover_stride);
  std::size_t failed = 0;
  std::ostringstream net;
  net << "date,asset,net\n";
  for (const auto& pt : rolling) {
    if (!pt.ok) {
      ++failed;
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) {
      net << pt.date << ',' << s.returns[k].asset_id << ','
          << fmt_g(pt.table.net[k] * 100.0) << '\n';
    }
  }
  if (failed > 0) {
    s.warnings.push_back("spillover: " + std::to_string(failed) +
                         " rolling windows failed and were dropped");
  }
  out.write("net_spillover.csv", net.str());
}

int classify(const std::exception& e) {
  if (dynamic_cast<const config_error*>(&e)) return 1;
  if (dynamic_cast<const data_error*>(&e)) return 2;
  return 3;
}

const std::vector<Stage> kStageOrder = {
    Stage::Ingest, Stage::Diagnostics, Stage::Garch,    Stage::Marginals,
    Stage::Copulas, Stage::Risk,       Stage::Spillover};

Stage dependency_of(Stage s) {
  switch (s) {
    case Stage::Diagnostics:
    case Stage::Garch:
    case Stage::Spillover:
      return Stage::Ingest;
    case Stage::Marginals:
      return Stage::Garch;
    case Stage::Copulas:
      return Stage::Marginals;
    case Stage::Risk:
      return Stage::Copulas;
    default:
      return Stage::Ingest;
  }
}

bool stage_requested(Stage s, Stage target) {
  if (target == Stage::All) return true;
  if (s == Stage::Ingest) return true;
  switch (s) {
    case Stage::Diagnostics:
      return target == Stage::Diagnostics;
    case Stage::Garch:
      return target == Stage::Garch || target == Stage::Marginals ||
             target == Stage::Copulas || target == Stage::Risk;
    case Stage::Marginals:
      return target == Stage::Marginals || target == Stage::Copulas ||
             target == Stage::Risk;
    case Stage::Copulas:
      return target == Stage::Copulas || target == Stage::Risk;
    case Stage::Risk:
      return target == Stage::Risk;
    case Stage::Spillover:
      return target == Stage::Spillover;
    default:
      return false;
  }
}

}  // namespace

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Diagnostics: return "diagnostics";
    case Stage::Garch: return "garch";
    case Stage::Marginals: return "marginals";
    case Stage::Copulas: return "copulas";
    case Stage::Risk: return "risk";
    case Stage::Spillover: return "spillover";
    case Stage::All: return "all";
  }
  return "unknown";
}

Stage stage_from_string(const std::string& name) {
  for (const Stage s : {Stage::Ingest, Stage::Diagnostics, Stage::Garch,
                        Stage::Marginals, Stage::Copulas, Stage::Risk,
                        Stage::Spillover, Stage::All}) {
    if (to_string(s) == name) return s;
  }
  throw config_error("unknown stage name: " + name);
}

PipelineResult run_pipeline(const PipelineConfig& config, Stage target) {
  if (target == Stage::Spillover && !config.spillover_enabled) {
    throw config_error(
        "spillover stage requested but spillover.enabled = false");
  }
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw data_error("cannot create output directory " + config.output_dir +
                     ": " + ec.message());
  }

  PipelineResult result;
  PipelineState state;
  OutputWriter out{std::filesystem::path(config.output_dir)};
  std::map<Stage, bool> succeeded;

  for (const Stage st : kStageOrder) {
    StageReport rep;
    rep.stage = st;
    if (st == Stage::Spillover && target == Stage::All &&
        !config.spillover_enabled) {
      rep.status = "disabled";
      rep.detail = "spillover.enabled = false";
    } else if (!stage_requested(st, target)) {
      rep.status = "skipped";
      rep.detail = "not requested";
    } else if (!succeeded.count(dependency_of(st)) && st != Stage::Ingest) {
      rep.status = "skipped";
      rep.detail = "upstream stage " + to_string(dependency_of(st)) + " failed";
      result.complete = false;
    } else {
      try {
        switch (st) {
          case Stage::Ingest: stage_ingest(config, state); break;
          case Stage::Diagnostics: stage_diagnostics(config, state, out); break;
          case Stage::Garch: stage_garch(config, state, out); break;
          case Stage::Marginals: stage_marginals(config, state, out); break;
          case Stage::Copulas: stage_copulas(config, state, out); break;
          case Stage::Risk: stage_risk(config, state, out); break;
          case Stage::Spillover: stage_spillover(config, state, out); break;
          default: break;
        }
        rep.status = "ok";
        succeeded[st] = true;
      } catch (const std::exception& e) {
        rep.status = "failed";
        rep.detail = e.what();
        if (result.exit_code == 0) result.exit_code = classify(e);
      }
    }
    result.stages.push_back(std::move(rep));
  }

  bool complete = true;
  for (const auto& rep : result.stages) {
    if (rep.status == "failed" ||
        (rep.status == "skipped" && rep.detail != "not requested")) {
      complete = false;
    }
  }
  result.complete = complete;

  json manifest;
  manifest["complete"] = complete;
  json stages = json::object();
  for (const auto& rep : result.stages) {
    json entry;
    entry["status"] = rep.status;
    if (!rep.detail.empty()) entry["detail"] = rep.detail;
    stages[to_string(rep.stage)] = std::move(entry);
  }
  manifest["stages"] = std::move(stages);
  std::vector<std::string> sorted_outputs = out.names();
  std::sort(sorted_outputs.begin(), sorted_outputs.end());
  manifest["outputs"] = sorted_outputs;
  manifest["warnings"] = state.warnings;
  try {
    out.write("manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    if (result.exit_code == 0) result.exit_code = classify(e);
  }

  result.outputs = out.names();
  return result;
}

}  // namespace tailrisk
