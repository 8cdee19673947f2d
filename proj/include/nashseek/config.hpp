#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nashseek/csv_io.hpp"
#include "nashseek/perturbation.hpp"
#include "nashseek/schedule.hpp"
#include "nashseek/wireless.hpp"

namespace nashseek {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class GameKind { Wireless, Quadratic, Constant };
enum class InitMode { Values, EquilibriumOffset };

struct QuadraticSpec {
  std::vector<double> peak{2.0};
  std::vector<double> curvature{1.0};
  double noise_sd = 0.0;
};

struct ConstantSpec {
  std::vector<double> values{0.0};
};

struct AnalysisSpec {
  double window_fraction = 0.1;
  double ode_h = 0.0;  // 0 = min(0.01, lambda/10)
  bool ode_compare = false;
  bool bounds = false;
  bool diagnostics = false;
  bool envelope = false;
  double compare_t0 = 0.0;
  double compare_window = 5.0;
  std::vector<double> compare_lambdas;
  std::size_t compare_seeds = 30;
  double eps = 0.01;
  double envelope_Mbar = 0.0;  // 0 = fit from the run
  double envelope_mbar = 0.0;
  double action_bound = 0.0;   // C0; 0 = max ||actions|| over the trajectory
  double bound_window = 1.0;
  std::size_t lipschitz_pairs = 256;
  std::size_t tail_truncation = 100000;
  std::size_t probe_budget = 16;
};

// One declarative file describes the whole experiment: the game, the dither,
// the schedule, the run and the analysis toggles. Round-trips losslessly
// through serialize_ini / parse_config.
struct ExperimentConfig {
  GameKind game = GameKind::Wireless;

  // wireless
  std::size_t pairs = 2;
  double bandwidth = 10.0;
  double price = 2.0;
  double noise_var = 1.0;
  double gain_var_diag = 1.0;
  double gain_var_cross = 0.01;
  bool frozen_channel = false;
  ExpectationMode expectation = ExpectationMode::Exact;
  std::size_t mc_samples = 2000;

  QuadraticSpec quadratic;
  ConstantSpec constant;

  PerturbationParams perturbation{{0.9, 0.9}, {0.9, 1.0}, {0.0, 0.0}, {0.9, 0.9}};
  StepSchedule schedule{ScheduleKind::Constant, 0.01};

  std::size_t horizon = 200000;
  InitMode init_mode = InitMode::EquilibriumOffset;
  std::vector<double> init_values;
  double init_offset = 10.0;
  bool clamp_nonnegative = false;
  std::uint64_t seed = 1;
  bool baseline = false;        // also run projected oracle-gradient ascent
  double baseline_max = 20.0;   // projection box [0, baseline_max]

  AnalysisSpec analysis;
  std::string out_dir = "out";

  WirelessParams wireless_params() const {
    return WirelessParams::uniform(pairs, gain_var_diag, gain_var_cross, bandwidth,
                                   price, noise_var);
  }

  std::size_t node_count() const {
    switch (game) {
      case GameKind::Wireless: return pairs;
      case GameKind::Quadratic: return quadratic.peak.size();
      default: return constant.values.size();
    }
  }
};

namespace cfgdetail {

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline SectionMap parse_ini(std::istream& in) {
  SectionMap out;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[section][key] = value;
  }
  return out;
}

inline SectionMap from_json(const nlohmann::json& j) {
  SectionMap out;
  for (const auto& [section, body] : j.items()) {
    if (!body.is_object()) throw ConfigError("config json: section '" + section +
                                             "' must be an object");
    for (const auto& [key, val] : body.items()) {
      std::string s;
      if (val.is_string()) {
        s = val.get<std::string>();
      } else if (val.is_boolean()) {
        s = val.get<bool>() ? "true" : "false";
      } else if (val.is_number()) {
        s = val.dump();
      } else if (val.is_array()) {
        std::ostringstream os;
        bool first = true;
        for (const auto& e : val) {
          if (!first) os << ' ';
          first = false;
          if (e.is_string())
            os << e.get<std::string>();
          else
            os << e.dump();
        }
        s = os.str();
      } else {
        throw ConfigError("config json: unsupported value for " + section + "." + key);
      }
      out[section][key] = s;
    }
  }
  return out;
}

class Reader {
 public:
  explicit Reader(SectionMap m) : map_(std::move(m)) {}

  bool has(const std::string& sec, const std::string& key) const {
    const auto s = map_.find(sec);
    return s != map_.end() && s->second.count(key) > 0;
  }

  std::string str(const std::string& sec, const std::string& key,
                  const std::string& fallback) const {
    const auto s = map_.find(sec);
    if (s == map_.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
  }

  double num(const std::string& sec, const std::string& key, double fallback) const {
    if (!has(sec, key)) return fallback;
    return parse_num(sec, key, str(sec, key, ""));
  }

  std::size_t uint(const std::string& sec, const std::string& key,
                   std::size_t fallback) const {
    const double v = num(sec, key, static_cast<double>(fallback));
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw ConfigError("config field " + sec + "." + key + ": expected a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& sec, const std::string& key, bool fallback) const {
    if (!has(sec, key)) return fallback;
    const std::string v = str(sec, key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config field " + sec + "." + key + ": expected a boolean");
  }

  std::vector<double> list(const std::string& sec, const std::string& key,
                           const std::vector<double>& fallback) const {
    if (!has(sec, key)) return fallback;
    std::istringstream is(str(sec, key, ""));
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(parse_num(sec, key, tok));
    return out;
  }

 private:
  double parse_num(const std::string& sec, const std::string& key,
                   const std::string& tok) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config field " + sec + "." + key + ": bad number '" + tok + "'");
    }
  }

  SectionMap map_;
};

inline std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ' ';
    os << format_double(v[i]);
  }
  return os.str();
}

}  // namespace cfgdetail

inline ExperimentConfig config_from_sections(const cfgdetail::SectionMap& sections) {
  cfgdetail::Reader r(sections);
  ExperimentConfig c;

  const std::string type = r.str("game", "type", "wireless");
  if (type == "wireless")
    c.game = GameKind::Wireless;
  else if (type == "quadratic")
    c.game = GameKind::Quadratic;
  else if (type == "constant")
    c.game = GameKind::Constant;
  else
    throw ConfigError("config field game.type: unknown game '" + type + "'");

  c.pairs = r.uint("game", "pairs", c.pairs);
  c.bandwidth = r.num("game", "bandwidth", c.bandwidth);
  c.price = r.num("game", "price", c.price);
  c.noise_var = r.num("game", "noise_var", c.noise_var);
  c.gain_var_diag = r.num("game", "gain_var_diag", c.gain_var_diag);
  c.gain_var_cross = r.num("game", "gain_var_cross", c.gain_var_cross);
  const std::string channel = r.str("game", "channel", "rayleigh");
  if (channel == "rayleigh")
    c.frozen_channel = false;
  else if (channel == "frozen")
    c.frozen_channel = true;
  else
    throw ConfigError("config field game.channel: expected rayleigh or frozen");
  const std::string exp = r.str("game", "expectation", "exact");
  if (exp == "exact")
    c.expectation = ExpectationMode::Exact;
  else if (exp == "mean_field")
    c.expectation = ExpectationMode::MeanField;
  else if (exp == "monte_carlo")
    c.expectation = ExpectationMode::MonteCarlo;
  else
    throw ConfigError("config field game.expectation: unknown mode '" + exp + "'");
  c.mc_samples = r.uint("game", "mc_samples", c.mc_samples);

  c.quadratic.peak = r.list("game", "peak", c.quadratic.peak);
  c.quadratic.curvature = r.list("game", "curvature", c.quadratic.curvature);
  c.quadratic.noise_sd = r.num("game", "noise_sd", c.quadratic.noise_sd);
  c.constant.values = r.list("game", "values", c.constant.values);

  c.perturbation.amplitude = r.list("perturbation", "amplitude", c.perturbation.amplitude);
  c.perturbation.frequency = r.list("perturbation", "frequency", c.perturbation.frequency);
  c.perturbation.phase = r.list("perturbation", "phase", c.perturbation.phase);
  c.perturbation.growth = r.list("perturbation", "growth", c.perturbation.growth);

  const std::string kind = r.str("schedule", "kind", "constant");
  if (kind == "constant")
    c.schedule.kind = ScheduleKind::Constant;
  else if (kind == "vanishing")
    c.schedule.kind = ScheduleKind::Vanishing;
  else
    throw ConfigError("config field schedule.kind: expected constant or vanishing");
  c.schedule.lambda0 = r.num("schedule", "lambda0", c.schedule.lambda0);

  c.horizon = r.uint("run", "horizon", c.horizon);
  if (r.has("run", "init")) {
    std::istringstream is(r.str("run", "init", ""));
    std::string mode;
    is >> mode;
    if (mode == "values") {
      c.init_mode = InitMode::Values;
      c.init_values.clear();
      double v;
      while (is >> v) c.init_values.push_back(v);
      if (c.init_values.empty())
        throw ConfigError("config field run.init: 'values' needs numbers");
    } else if (mode == "equilibrium_offset") {
      c.init_mode = InitMode::EquilibriumOffset;
      if (!(is >> c.init_offset))
        throw ConfigError("config field run.init: 'equilibrium_offset' needs an offset");
    } else {
      throw ConfigError("config field run.init: expected 'values ...' or "
                        "'equilibrium_offset X'");
    }
  }
  c.clamp_nonnegative = r.flag("run", "clamp_nonnegative", c.clamp_nonnegative);
  c.seed = static_cast<std::uint64_t>(r.num("run", "seed", static_cast<double>(c.seed)));
  c.baseline = r.flag("run", "baseline", c.baseline);
  c.baseline_max = r.num("run", "baseline_max", c.baseline_max);

  c.analysis.window_fraction = r.num("analysis", "window_fraction", c.analysis.window_fraction);
  c.analysis.ode_h = r.num("analysis", "ode_h", c.analysis.ode_h);
  c.analysis.ode_compare = r.flag("analysis", "ode_compare", c.analysis.ode_compare);
  c.analysis.bounds = r.flag("analysis", "bounds", c.analysis.bounds);
  c.analysis.diagnostics = r.flag("analysis", "diagnostics", c.analysis.diagnostics);
  c.analysis.envelope = r.flag("analysis", "envelope", c.analysis.envelope);
  c.analysis.compare_t0 = r.num("analysis", "compare_t0", c.analysis.compare_t0);
  c.analysis.compare_window = r.num("analysis", "compare_window", c.analysis.compare_window);
  c.analysis.compare_lambdas = r.list("analysis", "compare_lambdas", c.analysis.compare_lambdas);
  c.analysis.compare_seeds = r.uint("analysis", "compare_seeds", c.analysis.compare_seeds);
  c.analysis.eps = r.num("analysis", "eps", c.analysis.eps);
  c.analysis.envelope_Mbar = r.num("analysis", "Mbar", c.analysis.envelope_Mbar);
  c.analysis.envelope_mbar = r.num("analysis", "mbar", c.analysis.envelope_mbar);
  c.analysis.action_bound = r.num("analysis", "C0", c.analysis.action_bound);
  c.analysis.bound_window = r.num("analysis", "bound_window", c.analysis.bound_window);
  c.analysis.lipschitz_pairs = r.uint("analysis", "lipschitz_pairs", c.analysis.lipschitz_pairs);
  c.analysis.tail_truncation = r.uint("analysis", "tail_truncation", c.analysis.tail_truncation);
  c.analysis.probe_budget = r.uint("analysis", "probe_budget", c.analysis.probe_budget);

  c.out_dir = r.str("output", "dir", c.out_dir);
  return c;
}

// Structural validation beyond parsing; throws ConfigError naming the field.
inline void validate_config(const ExperimentConfig& c) {
  const std::size_t n = c.node_count();
  if (n == 0) throw ConfigError("config: game has no nodes");
  try {
    c.perturbation.validate();
    c.schedule.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.perturbation.nodes() != n)
    throw ConfigError("config field perturbation.*: expected " + std::to_string(n) +
                      " entries per array");
  if (c.game == GameKind::Wireless) {
    try {
      c.wireless_params().validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  if (c.game == GameKind::Quadratic &&
      c.quadratic.peak.size() != c.quadratic.curvature.size())
    throw ConfigError("config field game.curvature: size must match game.peak");
  if (c.init_mode == InitMode::Values && c.init_values.size() != n)
    throw ConfigError("config field run.init: expected " + std::to_string(n) + " values");
  if (c.init_mode == InitMode::EquilibriumOffset && c.game != GameKind::Wireless)
    throw ConfigError("config field run.init: equilibrium_offset requires the wireless game");
  if (!(c.analysis.window_fraction > 0.0 && c.analysis.window_fraction <= 1.0))
    throw ConfigError("config field analysis.window_fraction: must lie in (0, 1]");
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  cfgdetail::SectionMap sections;
  if (i < text.size() && text[i] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config json: ") + e.what());
    }
    sections = cfgdetail::from_json(j);
  } else {
    std::istringstream is(text);
    sections = cfgdetail::parse_ini(is);
  }
  auto cfg = config_from_sections(sections);
  validate_config(cfg);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return parse_config_text(os.str());
}

inline std::string serialize_ini(const ExperimentConfig& c) {
  using cfgdetail::join;
  std::ostringstream os;
  os << "[game]\n";
  os << "type = "
     << (c.game == GameKind::Wireless
             ? "wireless"
             : c.game == GameKind::Quadratic ? "quadratic" : "constant")
     << "\n";
  if (c.game == GameKind::Wireless) {
    os << "pairs = " << c.pairs << "\n";
    os << "bandwidth = " << format_double(c.bandwidth) << "\n";
    os << "price = " << format_double(c.price) << "\n";
    os << "noise_var = " << format_double(c.noise_var) << "\n";
    os << "gain_var_diag = " << format_double(c.gain_var_diag) << "\n";
    os << "gain_var_cross = " << format_double(c.gain_var_cross) << "\n";
    os << "channel = " << (c.frozen_channel ? "frozen" : "rayleigh") << "\n";
    os << "expectation = " << to_string(c.expectation) << "\n";
    os << "mc_samples = " << c.mc_samples << "\n";
  } else if (c.game == GameKind::Quadratic) {
    os << "peak = " << join(c.quadratic.peak) << "\n";
    os << "curvature = " << join(c.quadratic.curvature) << "\n";
    os << "noise_sd = " << format_double(c.quadratic.noise_sd) << "\n";
  } else {
    os << "values = " << join(c.constant.values) << "\n";
  }
  os << "\n[perturbation]\n";
  os << "amplitude = " << join(c.perturbation.amplitude) << "\n";
  os << "frequency = " << join(c.perturbation.frequency) << "\n";
  os << "phase = " << join(c.perturbation.phase) << "\n";
  os << "growth = " << join(c.perturbation.growth) << "\n";
  os << "\n[schedule]\n";
  os << "kind = " << to_string(c.schedule.kind) << "\n";
  os << "lambda0 = " << format_double(c.schedule.lambda0) << "\n";
  os << "\n[run]\n";
  os << "horizon = " << c.horizon << "\n";
  if (c.init_mode == InitMode::Values)
    os << "init = values " << join(c.init_values) << "\n";
  else
    os << "init = equilibrium_offset " << format_double(c.init_offset) << "\n";
  os << "clamp_nonnegative = " << (c.clamp_nonnegative ? "true" : "false") << "\n";
  os << "seed = " << c.seed << "\n";
  os << "baseline = " << (c.baseline ? "true" : "false") << "\n";
  os << "baseline_max = " << format_double(c.baseline_max) << "\n";
  os << "\n[analysis]\n";
  os << "window_fraction = " << format_double(c.analysis.window_fraction) << "\n";
  os << "ode_h = " << format_double(c.analysis.ode_h) << "\n";
  os << "ode_compare = " << (c.analysis.ode_compare ? "true" : "false") << "\n";
  os << "bounds = " << (c.analysis.bounds ? "true" : "false") << "\n";
  os << "diagnostics = " << (c.analysis.diagnostics ? "true" : "false") << "\n";
  os << "envelope = " << (c.analysis.envelope ? "true" : "false") << "\n";
  os << "compare_t0 = " << format_double(c.analysis.compare_t0) << "\n";
  os << "compare_window = " << format_double(c.analysis.compare_window) << "\n";
  if (!c.analysis.compare_lambdas.empty())
    os << "compare_lambdas = " << join(c.analysis.compare_lambdas) << "\n";
  os << "compare_seeds = " << c.analysis.compare_seeds << "\n";
  os << "eps = " << format_double(c.analysis.eps) << "\n";
  os << "Mbar = " << format_double(c.analysis.envelope_Mbar) << "\n";
  os << "mbar = " << format_double(c.analysis.envelope_mbar) << "\n";
  os << "C0 = " << format_double(c.analysis.action_bound) << "\n";
  os << "bound_window = " << format_double(c.analysis.bound_window) << "\n";
  os << "lipschitz_pairs = " << c.analysis.lipschitz_pairs << "\n";
  os << "tail_truncation = " << c.analysis.tail_truncation << "\n";
  os << "probe_budget = " << c.analysis.probe_budget << "\n";
  os << "\n[output]\n";
  os << "dir = " << c.out_dir << "\n";
  return os.str();
}

}  // namespace nashseek
