#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cfmimo/rng.hpp"

namespace cfmimo {

enum class PathLossKind { ThreeSlope, SimpleExponent };

// COST-Hata style three-slope model: constant gain below d0, a 20 dB/decade
// law between d0 and d1, and 35 dB/decade with the Hata offset beyond d1.
struct ThreeSlopeParams {
  double f_mhz = 1900.0;
  double h_ap_m = 15.0;
  double h_user_m = 1.65;
  double d0_m = 10.0;
  double d1_m = 50.0;
};

// Single power law: PL(d) = ref_loss_db - 10 * exponent * log10(d_km).
// Analytic, used mostly by unit fixtures.
struct SimpleExponentParams {
  double exponent = 3.5;
  double ref_loss_db = -140.0;  // gain in dB at 1 km
};

struct PathLossModel {
  PathLossKind kind = PathLossKind::ThreeSlope;
  ThreeSlopeParams three_slope;
  SimpleExponentParams simple_exponent;
};

enum class PilotMode { RandomUnitNorm, OrthogonalIfPossible };

struct SolverTolerances {
  double bisect_tol = 1e-4;      // relative, on the balanced SINR t
  double full_power_tol = 1e-7;  // refine until max_k q_k / p_max_k >= 1 - this
  double fp_tol = 1e-10;         // absolute, on fixed-point power iterates
  int fp_max_iters = 10000;
  double conv_tol = 1e-3;        // relative, on t between outer iterations
  int max_outer_iters = 50;
};

// All scalars of a drop ensemble. Users 0..K1-1 are the real-time users
// (RTUs) holding fixed SINR targets; the rest are the max-min users.
struct ScenarioConfig {
  int M = 15;   // access points
  int N = 3;    // antennas per AP
  int K = 6;    // single-antenna users
  int K1 = 2;   // real-time users
  int tau = 5;  // pilot length in symbols

  double D_km = 1.0;         // square coverage side
  double sigma_sh_db = 8.0;  // shadow-fading std
  double bandwidth_hz = 20e6;
  double noise_figure_db = 9.0;
  double noise_temp_k = 290.0;
  double pilot_power_mw = 200.0;
  double data_power_mw = 200.0;
  double p_max_mw = 200.0;  // per-user cap; defaults to the data power
  std::vector<double> sinr_targets = {2.3, 2.3};  // linear, one per RTU

  PathLossModel pathloss;
  double min_distance_m = 10.0;  // clamp against singular path loss
  bool wraparound = true;        // torus metric for D-scale drops
  PilotMode pilot_mode = PilotMode::RandomUnitNorm;
  uint64_t seed = 1;
  SolverTolerances tol;

  void validate() const;  // throws ConfigError

  Eigen::VectorXd rtu_targets() const;
  // Per-user cap on q in units of the data power (so q = 1 means
  // transmitting at data_power_mw).
  Eigen::VectorXd p_max() const;
};

struct NetworkGeometry {
  Eigen::MatrixX2d ap_positions;    // km
  Eigen::MatrixX2d user_positions;  // km
};

struct LargeScaleModel {
  Eigen::MatrixXd beta;  // M x K linear power gains
  NetworkGeometry geometry;
};

// Path gain in dB at the given distance, after the minimum-distance clamp.
double pathloss_db(const PathLossModel& model, double distance_km,
                   double min_distance_m);

double distance_km(const Eigen::RowVector2d& a, const Eigen::RowVector2d& b,
                   double D_km, bool wraparound);

// Uniform i.i.d. placement of APs and users over the D x D square.
NetworkGeometry generate_geometry(const ScenarioConfig& config, Rng& rng);

// beta_mk = PL(d_mk) * 10^(sigma_sh z_mk / 10), z ~ N(0,1).
LargeScaleModel large_scale_fading(const NetworkGeometry& geometry,
                                   const ScenarioConfig& config, Rng& rng);

// P_n = BW * k_B * T0 * 10^(NF/10), watts.
double noise_power_w(const ScenarioConfig& config);

struct NormalizedSnrs {
  double pilot;  // p_p: pilot power over noise power
  double data;   // rho: data power over noise power
};
NormalizedSnrs normalized_snrs(const ScenarioConfig& config);

}  // namespace cfmimo
