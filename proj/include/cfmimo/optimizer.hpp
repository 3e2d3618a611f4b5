#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cfmimo/power_control.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

struct Solution {
  SolveStatus status = SolveStatus::Optimal;
  Eigen::MatrixXd U;  // M x K receiver weights, unit-norm columns
  Eigen::VectorXd q;  // powers in data-power units
  double t_star = 0;
  Eigen::VectorXd per_user_sinr;
  Eigen::VectorXd per_user_rate;
  std::vector<double> trace;  // balanced SINR after each outer iteration
  int iterations = 0;
  bool hit_iteration_cap = false;
  int receiver_sign_violations = 0;
};

// Alternating optimization: starting from full power, repeat
//   1. per-user receiver design (rank-one generalized eigenproblem),
//   2. power allocation (SINR-floor maximization under the RTU targets),
// until the floor t stabilizes. The floor achieved at iteration i is passed
// to iteration i+1 as a known-feasible warm start, which makes the trace
// non-decreasing by construction.
//
// If the very first power solve is infeasible, one retry with unweighted
// combining (u_mk = 1/sqrt(M)) is attempted before reporting
// InfeasibleRtuTargets; an infeasible solution reports all SINRs as zero.
Solution run(const EstimationStats& stats, const PilotBook& pilots,
             const ScenarioConfig& config);

// Baseline without receiver design: u_mk = 1/sqrt(M) for every m, k (the
// SINR is scale-invariant in u, so this equals u_mk = 1) and a single power
// solve.
Solution run_benchmark_u1(const EstimationStats& stats, const PilotBook& pilots,
                          const ScenarioConfig& config);

}  // namespace cfmimo
