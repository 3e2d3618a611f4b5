#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "cfmimo/pilots.hpp"

namespace cfmimo {

// SINR of user k as an explicit function of the power vector, for fixed
// receiver weights:
//
//   SINR_k(q) = S q_k / (sum_k' D[k'] q_k' + C)
//
//   S     = N^2 (Gamma_k . u_k)^2
//   D[k'] = N^2 |phi_k^H phi_k'|^2 (Lambda_kk' . u_k)^2   (k' != k)
//         + N sum_m u_mk^2 beta_mk' gamma_mk              (all k', incl. k)
//   C     = (N/rho) sum_m u_mk^2 gamma_mk
//
// Every coefficient is non-negative and C is strictly positive, which makes
// the per-target power update a standard interference function.
struct SinrLinearForm {
  double S = 0;
  Eigen::VectorXd D;  // length K; entry k is the self-interference coefficient
  double C = 0;
};

std::vector<SinrLinearForm> linearize(const Eigen::Ref<const Eigen::MatrixXd>& U,
                                      const EstimationStats& stats,
                                      const PilotBook& pilots, int N, double rho);

double sinr_at(const SinrLinearForm& form, int k,
               const Eigen::Ref<const Eigen::VectorXd>& q);

struct FixedPointOptions {
  double tol = 1e-10;  // absolute, on q
  int max_iters = 10000;
};

// Componentwise-minimal q meeting SINR_k(q) >= targets[k] for every k, found
// by the monotone iteration
//
//   q_k <- targets_k (sum_{k' != k} D[k'] q_k' + C) / (S - targets_k D[k])
//
// started from q = 0. Returns nullopt when the system is infeasible: some
// S - targets_k D[k] <= 0, an iterate escapes the power box, or the budget
// runs out before convergence. Entries with targets[k] == 0 get q_k = 0.
std::optional<Eigen::VectorXd> feasibility_fixed_point(
    const Eigen::Ref<const Eigen::VectorXd>& targets,
    const std::vector<SinrLinearForm>& forms,
    const Eigen::Ref<const Eigen::VectorXd>& p_max,
    const FixedPointOptions& opts = {});

enum class SolveStatus { Optimal, InfeasibleRtuTargets };
const char* to_string(SolveStatus status);

struct PowerSolveResult {
  SolveStatus status = SolveStatus::Optimal;
  double t_star = 0;
  Eigen::VectorXd q;
  int bisection_iters = 0;  // feasibility probes spent
  Eigen::VectorXd per_user_sinr;
};

struct PowerSolveOptions {
  double bisect_tol = 1e-4;      // relative, on t
  double full_power_tol = 1e-7;  // keep bisecting until max q/p_max >= 1 - this
  int max_probes = 200;
  // Known-feasible warm start for t (e.g. the floor achieved at the previous
  // outer iteration); ignored when <= 0.
  double t_floor = 0;
  FixedPointOptions fp;
};

// Maximizes the SINR floor t over the max-min users (indices >= K1) subject
// to per-user power caps and the fixed targets of users 0..K1-1. Bisection
// on t with the fixed-point feasibility test; the interval keeps shrinking
// past bisect_tol until the minimal feasible q has a user within
// full_power_tol of its cap, and the final q is then scaled up to exact
// full-power activity (every SINR strictly increases under a uniform power
// scale-up, so feasibility is preserved).
//
// Degenerate case K1 == K: nothing to maximize; returns the minimal q meeting
// the targets with t_star = 0.
PowerSolveResult solve_power(const std::vector<SinrLinearForm>& forms,
                             const Eigen::Ref<const Eigen::VectorXd>& rtu_targets,
                             const Eigen::Ref<const Eigen::VectorXd>& p_max,
                             const PowerSolveOptions& opts = {});

}  // namespace cfmimo
