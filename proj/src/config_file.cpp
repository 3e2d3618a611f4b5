#include "cfmimo/config_file.hpp"

#include <fstream>
#include <sstream>

#include "cfmimo/errors.hpp"

namespace cfmimo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for " + key + ": '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return static_cast<int>(x);
  } catch (const std::exception&) {
    throw ConfigError("invalid integer for " + key + ": '" + v + "'");
  }
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("invalid seed for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

}  // namespace

void apply_override(ScenarioConfig& c, const std::string& key,
                    const std::string& value) {
  if (key == "M") c.M = parse_int(key, value);
  else if (key == "N") c.N = parse_int(key, value);
  else if (key == "K") c.K = parse_int(key, value);
  else if (key == "K1") c.K1 = parse_int(key, value);
  else if (key == "tau") c.tau = parse_int(key, value);
  else if (key == "D_km") c.D_km = parse_double(key, value);
  else if (key == "sigma_sh_db") c.sigma_sh_db = parse_double(key, value);
  else if (key == "bandwidth_hz") c.bandwidth_hz = parse_double(key, value);
  else if (key == "noise_figure_db") c.noise_figure_db = parse_double(key, value);
  else if (key == "noise_temp_k") c.noise_temp_k = parse_double(key, value);
  else if (key == "pilot_power_mw") c.pilot_power_mw = parse_double(key, value);
  else if (key == "data_power_mw") c.data_power_mw = parse_double(key, value);
  else if (key == "p_max_mw") c.p_max_mw = parse_double(key, value);
  else if (key == "sinr_targets") c.sinr_targets = parse_list(key, value);
  else if (key == "pathloss") {
    if (value == "three_slope") c.pathloss.kind = PathLossKind::ThreeSlope;
    else if (value == "simple_exponent") c.pathloss.kind = PathLossKind::SimpleExponent;
    else throw ConfigError("pathloss must be three_slope or simple_exponent");
  }
  else if (key == "pl_f_mhz") c.pathloss.three_slope.f_mhz = parse_double(key, value);
  else if (key == "pl_h_ap_m") c.pathloss.three_slope.h_ap_m = parse_double(key, value);
  else if (key == "pl_h_user_m") c.pathloss.three_slope.h_user_m = parse_double(key, value);
  else if (key == "pl_d0_m") c.pathloss.three_slope.d0_m = parse_double(key, value);
  else if (key == "pl_d1_m") c.pathloss.three_slope.d1_m = parse_double(key, value);
  else if (key == "pl_exponent") c.pathloss.simple_exponent.exponent = parse_double(key, value);
  else if (key == "pl_ref_loss_db") c.pathloss.simple_exponent.ref_loss_db = parse_double(key, value);
  else if (key == "min_distance_m") c.min_distance_m = parse_double(key, value);
  else if (key == "wraparound") c.wraparound = parse_bool(key, value);
  else if (key == "pilot_mode") {
    if (value == "random") c.pilot_mode = PilotMode::RandomUnitNorm;
    else if (value == "orthogonal") c.pilot_mode = PilotMode::OrthogonalIfPossible;
    else throw ConfigError("pilot_mode must be random or orthogonal");
  }
  else if (key == "seed") c.seed = parse_u64(key, value);
  else if (key == "bisect_tol") c.tol.bisect_tol = parse_double(key, value);
  else if (key == "full_power_tol") c.tol.full_power_tol = parse_double(key, value);
  else if (key == "fp_tol") c.tol.fp_tol = parse_double(key, value);
  else if (key == "fp_max_iters") c.tol.fp_max_iters = parse_int(key, value);
  else if (key == "conv_tol") c.tol.conv_tol = parse_double(key, value);
  else if (key == "max_outer_iters") c.tol.max_outer_iters = parse_int(key, value);
  else throw ConfigError("unknown config key: '" + key + "'");
}

void apply_override(ScenarioConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must be key=value: '" + assignment + "'");
  apply_override(config, trim(assignment.substr(0, eq)),
                 trim(assignment.substr(eq + 1)));
}

void normalize_targets(ScenarioConfig& c) {
  if (c.K1 == 0) c.sinr_targets.clear();
  else if (c.sinr_targets.size() == 1 && c.K1 > 1)
    c.sinr_targets.assign(c.K1, c.sinr_targets.front());
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  ScenarioConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_override(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  normalize_targets(c);
  return c;
}

nlohmann::json config_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["M"] = c.M;
  j["N"] = c.N;
  j["K"] = c.K;
  j["K1"] = c.K1;
  j["tau"] = c.tau;
  j["D_km"] = c.D_km;
  j["sigma_sh_db"] = c.sigma_sh_db;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["noise_figure_db"] = c.noise_figure_db;
  j["noise_temp_k"] = c.noise_temp_k;
  j["pilot_power_mw"] = c.pilot_power_mw;
  j["data_power_mw"] = c.data_power_mw;
  j["p_max_mw"] = c.p_max_mw;
  j["sinr_targets"] = c.sinr_targets;
  j["pathloss"] = c.pathloss.kind == PathLossKind::ThreeSlope ? "three_slope"
                                                              : "simple_exponent";
  j["pl_f_mhz"] = c.pathloss.three_slope.f_mhz;
  j["pl_h_ap_m"] = c.pathloss.three_slope.h_ap_m;
  j["pl_h_user_m"] = c.pathloss.three_slope.h_user_m;
  j["pl_d0_m"] = c.pathloss.three_slope.d0_m;
  j["pl_d1_m"] = c.pathloss.three_slope.d1_m;
  j["pl_exponent"] = c.pathloss.simple_exponent.exponent;
  j["pl_ref_loss_db"] = c.pathloss.simple_exponent.ref_loss_db;
  j["min_distance_m"] = c.min_distance_m;
  j["wraparound"] = c.wraparound;
  j["pilot_mode"] =
      c.pilot_mode == PilotMode::RandomUnitNorm ? "random" : "orthogonal";
  j["seed"] = c.seed;
  j["bisect_tol"] = c.tol.bisect_tol;
  j["full_power_tol"] = c.tol.full_power_tol;
  j["fp_tol"] = c.tol.fp_tol;
  j["fp_max_iters"] = c.tol.fp_max_iters;
  j["conv_tol"] = c.tol.conv_tol;
  j["max_outer_iters"] = c.tol.max_outer_iters;
  return j;
}

}  // namespace cfmimo
