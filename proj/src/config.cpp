#include "tailrisk/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string_view>

#include "tailrisk/errors.hpp"

namespace tailrisk {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

bool valid_asset_id(const std::string& id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.' || c == '-';
  });
}

// Raw key/value lines grouped by section, insertion order kept for [data].
struct RawConfig {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::vector<std::pair<std::string, std::string>> data_entries;
};

class ErrorList {
 public:
  void add(const std::string& key, const std::string& reason) {
    lines_.push_back(key + ": " + reason);
  }
  void raise_if_any() const {
    if (lines_.empty()) return;
    std::string msg = "invalid config:";
    for (const auto& line : lines_) msg += "\n  " + line;
    throw config_error(msg);
  }

 private:
  std::vector<std::string> lines_;
};

RawConfig parse_raw(const std::string& text, ErrorList& errors) {
  static const std::set<std::string> kSections = {
      "data",      "portfolios", "levels", "garch", "marginals",
      "copulas",   "risk",       "spillover", "run"};
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        errors.add("line " + std::to_string(line_no), "unterminated section header");
        continue;
      }
      section = trim(t.substr(1, t.size() - 2));
      if (!kSections.count(section)) {
        errors.add(section, "unknown section");
        section = "";
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors.add("line " + std::to_string(line_no), "expected key = value");
      continue;
    }
    if (section.empty()) {
      errors.add("line " + std::to_string(line_no), "key outside any section");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      errors.add("line " + std::to_string(line_no), "empty key");
      continue;
    }
    if (section == "data") {
      const bool dup = std::any_of(
          raw.data_entries.begin(), raw.data_entries.end(),
          [&](const auto& e) { return e.first == key; });
      if (dup) {
        errors.add("data." + key, "duplicate asset");
      } else {
        raw.data_entries.emplace_back(key, value);
      }
      continue;
    }
    auto& sec = raw.sections[section];
    if (sec.count(key)) {
      errors.add(section + "." + key, "duplicate key");
    } else {
      sec[key] = value;
    }
  }
  return raw;
}

// Pulls section.key out of the raw map, flagging leftovers as unknown later.
class SectionReader {
 public:
  SectionReader(RawConfig& raw, std::string section, ErrorList& errors)
      : raw_(raw), section_(std::move(section)), errors_(errors) {}

  bool has(const std::string& key) {
    auto it = raw_.sections.find(section_);
    return it != raw_.sections.end() && it->second.count(key) > 0;
  }

  std::string take(const std::string& key) {
    auto& sec = raw_.sections[section_];
    auto it = sec.find(key);
    const std::string value = it->second;
    sec.erase(it);
    return value;
  }

  void read_int(const std::string& key, int& out) {
    if (!has(key)) return;
    const std::string v = take(key);
    int parsed = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), parsed);
    if (ec != std::errc() || p != v.data() + v.size()) {
      errors_.add(section_ + "." + key, "expected an integer, got '" + v + "'");
      return;
    }
    out = parsed;
  }

  void read_size(const std::string& key, std::size_t& out) {
    if (!has(key)) return;
    const std::string v = take(key);
    unsigned long long parsed = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), parsed);
    if (ec != std::errc() || p != v.data() + v.size()) {
      errors_.add(section_ + "." + key,
                  "expected a non-negative integer, got '" + v + "'");
      return;
    }
    out = static_cast<std::size_t>(parsed);
  }

  void read_u64(const std::string& key, std::uint64_t& out) {
    std::size_t tmp = static_cast<std::size_t>(out);
    read_size(key, tmp);
    out = tmp;
  }

  void read_bool(const std::string& key, bool& out) {
    if (!has(key)) return;
    const std::string v = take(key);
    if (v == "true" || v == "yes" || v == "1") {
      out = true;
    } else if (v == "false" || v == "no" || v == "0") {
      out = false;
    } else {
      errors_.add(section_ + "." + key, "expected true/false, got '" + v + "'");
    }
  }

  void read_string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    out = take(key);
  }

  bool read_double_value(const std::string& key, const std::string& v,
                         double& out) {
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
      errors_.add(section_ + "." + key, "expected a number, got '" + v + "'");
      return false;
    }
    return true;
  }

  ErrorList& errors() { return errors_; }
  const std::string& name() const { return section_; }

 private:
  RawConfig& raw_;
  std::string section_;
  ErrorList& errors_;
};

template <typename Enum, typename FromString>
void read_enum_list(SectionReader& sec, const std::string& key,
                    std::vector<Enum>& out, FromString from_string) {
  if (!sec.has(key)) return;
  const std::string v = sec.take(key);
  std::vector<Enum> parsed;
  for (const std::string& name : split(v, ',')) {
    try {
      parsed.push_back(from_string(name));
    } catch (const std::exception&) {
      sec.errors().add(sec.name() + "." + key, "unknown name '" + name + "'");
      return;
    }
  }
  if (parsed.empty()) {
    sec.errors().add(sec.name() + "." + key, "empty list");
    return;
  }
  out = std::move(parsed);
}

std::string format_double(double x) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc() ? std::string(buf, p) : std::string("nan");
}

double min_level(const PipelineConfig& c) {
  double lo = 1.0;
  for (double a : c.alphas) lo = std::min(lo, a);
  for (const auto& [a, b] : c.rvar_pairs) lo = std::min({lo, a, b});
  return lo;
}

void normalize_levels(PipelineConfig& c) {
  for (const auto& [a, b] : c.rvar_pairs) {
    c.alphas.push_back(a);
    c.alphas.push_back(b);
  }
  std::sort(c.alphas.begin(), c.alphas.end());
  c.alphas.erase(std::unique(c.alphas.begin(), c.alphas.end()), c.alphas.end());
}

void validate(PipelineConfig& c, ErrorList& errors) {
  if (c.assets.empty()) {
    errors.add("data", "at least one asset with a data path is required");
  }
  std::set<std::string> ids;
  for (const auto& asset : c.assets) {
    if (!valid_asset_id(asset.id)) {
      errors.add("data." + asset.id,
                 "asset ids may only contain letters, digits, '_', '.', '-'");
    }
    if (asset.path.empty()) {
      errors.add("data." + asset.id, "empty data path");
    }
    ids.insert(asset.id);
  }

  std::set<std::pair<std::string, std::string>> seen_pairs;
  for (const auto& [a, b] : c.portfolios) {
    const std::string label = a + ":" + b;
    if (!ids.count(a) || !ids.count(b)) {
      errors.add("portfolios.pairs", label + " references an asset without a data path");
      continue;
    }
    if (a == b) {
      errors.add("portfolios.pairs", label + " pairs an asset with itself");
      continue;
    }
    auto key = std::minmax(a, b);
    if (!seen_pairs.insert(key).second) {
      errors.add("portfolios.pairs", "duplicate pair " + label);
    }
  }

  if (c.alphas.empty()) {
    errors.add("levels.alphas", "at least one level is required");
  }
  for (double a : c.alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      errors.add("levels.alphas", "level " + format_double(a) + " outside (0,1)");
    }
  }
  for (const auto& [a, b] : c.rvar_pairs) {
    if (!(a > 0.0 && b < 1.0)) {
      errors.add("levels.pairs", "pair " + format_double(a) + ":" +
                                     format_double(b) + " outside (0,1)");
    } else if (a > b) {
      errors.add("levels.pairs", "alpha must not exceed beta, got " +
                                     format_double(a) + ":" + format_double(b));
    }
  }

  if (c.garch_kinds.empty()) errors.add("garch.kinds", "empty list");
  if (c.arma_max < 0 || c.arma_max > 8) {
    errors.add("garch.arma_max", "must lie in [0, 8]");
  }
  if (c.garch_restarts < 1) errors.add("garch.restarts", "must be >= 1");

  if (c.marginal_families.empty()) errors.add("marginals.families", "empty list");
  if (c.bootstrap_reps < 1) errors.add("marginals.bootstrap_reps", "must be >= 1");
  if (c.marginal_restarts < 1) errors.add("marginals.restarts", "must be >= 1");

  if (c.copula_families.empty()) errors.add("copulas.families", "empty list");

  const double lo = min_level(c);
  if (lo > 0.0 && static_cast<double>(c.n_sim) * lo < 100.0 - 1e-9) {
    errors.add("risk.n_sim",
               "must be at least 100/min(level) = " +
                   format_double(std::ceil(100.0 / lo)));
  }
  if (c.window < 250) errors.add("risk.window", "must be >= 250");
  if (c.refit_stride < 1) errors.add("risk.refit_stride", "must be >= 1");
  if (c.weights != "minvar" && c.weights != "equal") {
    errors.add("risk.weights", "expected minvar or equal, got '" + c.weights + "'");
  }

  if (c.spillover_lag < 0) errors.add("spillover.lag_order", "must be >= 0");
  if (c.spillover_horizon < 1) errors.add("spillover.horizon", "must be >= 1");
  if (c.spillover_stride < 1) errors.add("spillover.stride", "must be >= 1");
  if (c.spillover_enabled) {
    if (c.assets.size() < 2) {
      errors.add("spillover.enabled", "spillover requires at least two assets");
    } else {
      const std::size_t floor = c.assets.size() *
                                    static_cast<std::size_t>(c.spillover_lag) +
                                10;
      if (c.spillover_window <= floor) {
        errors.add("spillover.window",
                   "must exceed n_assets * lag_order + 10 = " +
                       std::to_string(floor));
      }
    }
  }

  if (c.output_dir.empty()) errors.add("run.output_dir", "must not be empty");
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text,
                                 const std::string& base_dir) {
  ErrorList errors;
  RawConfig raw = parse_raw(text, errors);
  PipelineConfig c;

  for (const auto& [id, path] : raw.data_entries) {
    std::string resolved = path;
    if (!base_dir.empty() && !path.empty() &&
        !std::filesystem::path(path).is_absolute()) {
      resolved = (std::filesystem::path(base_dir) / path).lexically_normal().string();
    }
    c.assets.push_back({id, resolved});
  }

  {
    SectionReader sec(raw, "portfolios", errors);
    if (sec.has("pairs")) {
      const std::string v = sec.take("pairs");
      c.portfolios.clear();
      for (const std::string& item : split(v, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2 || parts[0].empty() || parts[1].empty()) {
          errors.add("portfolios.pairs", "expected asset:asset, got '" + item + "'");
          continue;
        }
        c.portfolios.emplace_back(parts[0], parts[1]);
      }
    } else {
      // default: every unordered pair in listed order
      for (std::size_t i = 0; i < c.assets.size(); ++i) {
        for (std::size_t j = i + 1; j < c.assets.size(); ++j) {
          c.portfolios.emplace_back(c.assets[i].id, c.assets[j].id);
        }
      }
    }
  }

  {
    SectionReader sec(raw, "levels", errors);
    if (sec.has("alphas")) {
      const std::string v = sec.take("alphas");
      std::vector<double> parsed;
      for (const std::string& item : split(v, ',')) {
        double a = 0.0;
        if (sec.read_double_value("alphas", item, a)) parsed.push_back(a);
      }
      c.alphas = std::move(parsed);
    }
    if (sec.has("pairs")) {
      const std::string v = sec.take("pairs");
      c.rvar_pairs.clear();
      for (const std::string& item : split(v, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) {
          errors.add("levels.pairs", "expected alpha:beta, got '" + item + "'");
          continue;
        }
        double a = 0.0, b = 0.0;
        if (sec.read_double_value("pairs", parts[0], a) &&
            sec.read_double_value("pairs", parts[1], b)) {
          c.rvar_pairs.emplace_back(a, b);
        }
      }
    }
  }

  {
    SectionReader sec(raw, "garch", errors);
    read_enum_list(sec, "kinds", c.garch_kinds, variance_kind_from_string);
    sec.read_int("arma_max", c.arma_max);
    sec.read_int("restarts", c.garch_restarts);
  }
  {
    SectionReader sec(raw, "marginals", errors);
    read_enum_list(sec, "families", c.marginal_families,
                   marginal_family_from_string);
    sec.read_int("bootstrap_reps", c.bootstrap_reps);
    sec.read_int("restarts", c.marginal_restarts);
  }
  {
    SectionReader sec(raw, "copulas", errors);
    read_enum_list(sec, "families", c.copula_families, copula_family_from_string);
  }
  {
    SectionReader sec(raw, "risk", errors);
    sec.read_size("n_sim", c.n_sim);
    sec.read_size("window", c.window);
    sec.read_size("refit_stride", c.refit_stride);
    sec.read_string("weights", c.weights);
  }
  {
    SectionReader sec(raw, "spillover", errors);
    sec.read_bool("enabled", c.spillover_enabled);
    sec.read_int("lag_order", c.spillover_lag);
    sec.read_int("horizon", c.spillover_horizon);
    sec.read_size("window", c.spillover_window);
    sec.read_size("stride", c.spillover_stride);
  }
  {
    SectionReader sec(raw, "run", errors);
    sec.read_u64("seed", c.seed);
    sec.read_string("output_dir", c.output_dir);
  }

  for (const auto& [section, keys] : raw.sections) {
    for (const auto& [key, value] : keys) {
      errors.add(section + "." + key, "unknown key");
    }
  }

  normalize_levels(c);
  validate(c, errors);
  errors.raise_if_any();
  return c;
}

PipelineConfig validate_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config file not readable: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(),
                           std::filesystem::path(path).parent_path().string());
}

std::string serialize_config(const PipelineConfig& config) {
  std::ostringstream out;
  out << "[data]\n";
  for (const auto& asset : config.assets) {
    out << asset.id << " = " << asset.path << "\n";
  }

  out << "\n[portfolios]\npairs = ";
  for (std::size_t i = 0; i < config.portfolios.size(); ++i) {
    if (i) out << ",";
    out << config.portfolios[i].first << ":" << config.portfolios[i].second;
  }
  out << "\n";

  out << "\n[levels]\nalphas = ";
  for (std::size_t i = 0; i < config.alphas.size(); ++i) {
    if (i) out << ",";
    out << format_double(config.alphas[i]);
  }
  out << "\npairs = ";
  for (std::size_t i = 0; i < config.rvar_pairs.size(); ++i) {
    if (i) out << ",";
    out << format_double(config.rvar_pairs[i].first) << ":"
        << format_double(config.rvar_pairs[i].second);
  }
  out << "\n";

  out << "\n[garch]\nkinds = ";
  for (std::size_t i = 0; i < config.garch_kinds.size(); ++i) {
    if (i) out << ",";
    out << to_string(config.garch_kinds[i]);
  }
  out << "\narma_max = " << config.arma_max;
  out << "\nrestarts = " << config.garch_restarts << "\n";

  out << "\n[marginals]\nfamilies = ";
  for (std::size_t i = 0; i < config.marginal_families.size(); ++i) {
    if (i) out << ",";
    out << to_string(config.marginal_families[i]);
  }
  out << "\nbootstrap_reps = " << config.bootstrap_reps;
  out << "\nrestarts = " << config.marginal_restarts << "\n";

  out << "\n[copulas]\nfamilies = ";
  for (std::size_t i = 0; i < config.copula_families.size(); ++i) {
    if (i) out << ",";
    out << to_string(config.copula_families[i]);
  }
  out << "\n";

  out << "\n[risk]\nn_sim = " << config.n_sim;
  out << "\nwindow = " << config.window;
  out << "\nrefit_stride = " << config.refit_stride;
  out << "\nweights = " << config.weights << "\n";

  out << "\n[spillover]\nenabled = " << (config.spillover_enabled ? "true" : "false");
  out << "\nlag_order = " << config.spillover_lag;
  out << "\nhorizon = " << config.spillover_horizon;
  out << "\nwindow = " << config.spillover_window;
  out << "\nstride = " << config.spillover_stride << "\n";

  out << "\n[run]\nseed = " << config.seed;
  out << "\noutput_dir = " << config.output_dir << "\n";
  return out.str();
}

}  // namespace tailrisk
