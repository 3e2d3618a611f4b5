#include "cfmimo/scenario.hpp"

#include <cmath>
#include <sstream>

#include "cfmimo/errors.hpp"

namespace cfmimo {

namespace {
constexpr double kBoltzmann = 1.381e-23;
}

void ScenarioConfig::validate() const {
  std::ostringstream bad;
  auto require = [&](bool ok, const char* what) {
    if (!ok) bad << (bad.tellp() > 0 ? "; " : "") << what;
  };
  require(M >= 1, "M must be >= 1");
  require(N >= 1, "N must be >= 1");
  require(K >= 1, "K must be >= 1");
  require(K1 >= 0 && K1 <= K, "K1 must satisfy 0 <= K1 <= K");
  require(tau >= 1, "tau must be >= 1");
  require(D_km > 0, "D_km must be positive");
  require(sigma_sh_db >= 0, "sigma_sh_db must be non-negative");
  require(bandwidth_hz > 0, "bandwidth_hz must be positive");
  require(noise_temp_k > 0, "noise_temp_k must be positive");
  require(pilot_power_mw > 0, "pilot_power_mw must be positive");
  require(data_power_mw > 0, "data_power_mw must be positive");
  require(p_max_mw > 0, "p_max_mw must be positive");
  require(min_distance_m >= 0, "min_distance_m must be non-negative");
  require(static_cast<int>(sinr_targets.size()) == K1,
          "sinr_targets must have exactly K1 entries");
  for (double t : sinr_targets) require(t > 0, "sinr_targets must be positive");
  require(tol.bisect_tol > 0, "bisect_tol must be positive");
  require(tol.fp_tol > 0, "fp_tol must be positive");
  require(tol.fp_max_iters >= 1, "fp_max_iters must be >= 1");
  require(tol.conv_tol > 0, "conv_tol must be positive");
  require(tol.max_outer_iters >= 1, "max_outer_iters must be >= 1");
  if (bad.tellp() > 0) throw ConfigError(bad.str());
}

Eigen::VectorXd ScenarioConfig::rtu_targets() const {
  Eigen::VectorXd t(K1);
  for (int k = 0; k < K1; ++k) t[k] = sinr_targets[k];
  return t;
}

Eigen::VectorXd ScenarioConfig::p_max() const {
  return Eigen::VectorXd::Constant(K, p_max_mw / data_power_mw);
}

double pathloss_db(const PathLossModel& model, double distance_km,
                   double min_distance_m) {
  const double d = std::max(distance_km, min_distance_m / 1000.0);
  if (model.kind == PathLossKind::SimpleExponent) {
    const auto& p = model.simple_exponent;
    return p.ref_loss_db - 10.0 * p.exponent * std::log10(d);
  }
  const auto& p = model.three_slope;
  const double lf = std::log10(p.f_mhz);
  const double L = 46.3 + 33.9 * lf - 13.82 * std::log10(p.h_ap_m) -
                   (1.1 * lf - 0.7) * p.h_user_m + (1.56 * lf - 0.8);
  const double d0 = p.d0_m / 1000.0;
  const double d1 = p.d1_m / 1000.0;
  if (d > d1) return -L - 35.0 * std::log10(d);
  if (d > d0) return -L - 15.0 * std::log10(d1) - 20.0 * std::log10(d);
  return -L - 15.0 * std::log10(d1) - 20.0 * std::log10(d0);
}

double distance_km(const Eigen::RowVector2d& a, const Eigen::RowVector2d& b,
                   double D_km, bool wraparound) {
  double dx = std::abs(a.x() - b.x());
  double dy = std::abs(a.y() - b.y());
  if (wraparound) {
    dx = std::min(dx, D_km - dx);
    dy = std::min(dy, D_km - dy);
  }
  return std::hypot(dx, dy);
}

NetworkGeometry generate_geometry(const ScenarioConfig& config, Rng& rng) {
  config.validate();
  NetworkGeometry geo;
  geo.ap_positions.resize(config.M, 2);
  geo.user_positions.resize(config.K, 2);
  // APs first, then users; x before y per point.
  for (int m = 0; m < config.M; ++m) {
    geo.ap_positions(m, 0) = config.D_km * rng.uniform();
    geo.ap_positions(m, 1) = config.D_km * rng.uniform();
  }
  for (int k = 0; k < config.K; ++k) {
    geo.user_positions(k, 0) = config.D_km * rng.uniform();
    geo.user_positions(k, 1) = config.D_km * rng.uniform();
  }
  return geo;
}

LargeScaleModel large_scale_fading(const NetworkGeometry& geometry,
                                   const ScenarioConfig& config, Rng& rng) {
  if (geometry.ap_positions.rows() != config.M ||
      geometry.user_positions.rows() != config.K) {
    throw ConfigError("geometry does not match the configured M and K");
  }
  LargeScaleModel model;
  model.geometry = geometry;
  model.beta.resize(config.M, config.K);
  // Shadowing draws are column-major: all APs of user 0, then user 1, ...
  for (int k = 0; k < config.K; ++k) {
    for (int m = 0; m < config.M; ++m) {
      const double d = distance_km(geometry.ap_positions.row(m),
                                   geometry.user_positions.row(k),
                                   config.D_km, config.wraparound);
      const double pl_db = pathloss_db(config.pathloss, d, config.min_distance_m);
      const double z = rng.normal();
      model.beta(m, k) = std::pow(10.0, (pl_db + config.sigma_sh_db * z) / 10.0);
    }
  }
  return model;
}

double noise_power_w(const ScenarioConfig& config) {
  return config.bandwidth_hz * kBoltzmann * config.noise_temp_k *
         std::pow(10.0, config.noise_figure_db / 10.0);
}

NormalizedSnrs normalized_snrs(const ScenarioConfig& config) {
  const double pn = noise_power_w(config);
  return {config.pilot_power_mw * 1e-3 / pn, config.data_power_mw * 1e-3 / pn};
}

}  // namespace cfmimo
