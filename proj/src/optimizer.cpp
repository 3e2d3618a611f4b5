#include "cfmimo/optimizer.hpp"

#include <cmath>

#include "cfmimo/errors.hpp"
#include "cfmimo/rate_model.hpp"
#include "cfmimo/receiver.hpp"

namespace cfmimo {

namespace {

Eigen::VectorXd rates_from_sinrs(const Eigen::VectorXd& sinrs) {
  return (sinrs.array() + 1.0).log() / std::log(2.0);
}

Solution infeasible_solution(int M, int K, const Eigen::MatrixXd& U, int iterations) {
  Solution sol;
  sol.status = SolveStatus::InfeasibleRtuTargets;
  sol.U = U.size() > 0 ? U : Eigen::MatrixXd::Constant(M, K, 1.0 / std::sqrt(double(M)));
  sol.q = Eigen::VectorXd::Zero(K);
  sol.per_user_sinr = Eigen::VectorXd::Zero(K);
  sol.per_user_rate = Eigen::VectorXd::Zero(K);
  sol.iterations = iterations;
  return sol;
}

void check_dims(const EstimationStats& stats, const ScenarioConfig& config) {
  if (stats.M() != config.M || stats.K() != config.K)
    throw ConfigError("estimation statistics do not match the configured M, K");
}

}  // namespace

Solution run(const EstimationStats& stats, const PilotBook& pilots,
             const ScenarioConfig& config) {
  config.validate();
  check_dims(stats, config);
  const int M = config.M, K = config.K;
  const double rho = normalized_snrs(config).data;
  const Eigen::VectorXd p_max = config.p_max();
  const Eigen::VectorXd targets = config.rtu_targets();

  PowerSolveOptions popts;
  popts.bisect_tol = config.tol.bisect_tol;
  popts.full_power_tol = config.tol.full_power_tol;
  popts.fp.tol = config.tol.fp_tol;
  popts.fp.max_iters = config.tol.fp_max_iters;

  Solution sol;
  Eigen::VectorXd q = p_max;
  Eigen::MatrixXd U;
  double t_prev = 0;
  PowerSolveResult res;

  for (int iter = 1; iter <= config.tol.max_outer_iters; ++iter) {
    const auto models = build_all_models(stats, q, pilots, config.N, rho);
    ReceiverWeights w = design_all(models);
    sol.receiver_sign_violations += w.negative_entries;
    U = w.u;
    auto forms = linearize(U, stats, pilots, config.N, rho);
    popts.t_floor = iter > 1 ? t_prev : 0.0;
    res = solve_power(forms, targets, p_max, popts);

    if (res.status != SolveStatus::Optimal) {
      if (iter == 1) {
        // A different receiver could restore feasibility; try plain
        // unweighted combining once before giving up.
        U = Eigen::MatrixXd::Constant(M, K, 1.0 / std::sqrt(double(M)));
        forms = linearize(U, stats, pilots, config.N, rho);
        res = solve_power(forms, targets, p_max, popts);
      }
      if (res.status != SolveStatus::Optimal)
        return infeasible_solution(M, K, U, iter);
    }

    if (iter > 1 && res.t_star < t_prev) {
      // The previous allocation stays feasible under the new filters (each
      // per-user redesign can only raise its SINR), so never step backwards.
      const Eigen::VectorXd prev_sinrs = [&] {
        Eigen::VectorXd s(K);
        for (int k = 0; k < K; ++k) s[k] = sinr_at(forms[k], k, q);
        return s;
      }();
      const double t_prev_here =
          config.K1 < K ? prev_sinrs.tail(K - config.K1).minCoeff() : 0.0;
      if (t_prev_here > res.t_star) {
        res.q = q;
        res.per_user_sinr = prev_sinrs;
        res.t_star = t_prev_here;
      }
    }

    q = res.q;
    sol.trace.push_back(res.t_star);
    const bool converged =
        iter > 1 &&
        std::abs(res.t_star - t_prev) <= config.tol.conv_tol * std::max(1.0, t_prev);
    t_prev = res.t_star;
    if (converged) break;
    if (iter == config.tol.max_outer_iters) sol.hit_iteration_cap = true;
  }

  sol.status = SolveStatus::Optimal;
  sol.U = U;
  sol.q = q;
  sol.t_star = res.t_star;
  sol.per_user_sinr = res.per_user_sinr;
  sol.per_user_rate = rates_from_sinrs(res.per_user_sinr);
  sol.iterations = static_cast<int>(sol.trace.size());
  return sol;
}

Solution run_benchmark_u1(const EstimationStats& stats, const PilotBook& pilots,
                          const ScenarioConfig& config) {
  config.validate();
  check_dims(stats, config);
  const int M = config.M, K = config.K;
  const double rho = normalized_snrs(config).data;

  PowerSolveOptions popts;
  popts.bisect_tol = config.tol.bisect_tol;
  popts.full_power_tol = config.tol.full_power_tol;
  popts.fp.tol = config.tol.fp_tol;
  popts.fp.max_iters = config.tol.fp_max_iters;

  const Eigen::MatrixXd U =
      Eigen::MatrixXd::Constant(M, K, 1.0 / std::sqrt(double(M)));
  const auto forms = linearize(U, stats, pilots, config.N, rho);
  const PowerSolveResult res =
      solve_power(forms, config.rtu_targets(), config.p_max(), popts);
  if (res.status != SolveStatus::Optimal) return infeasible_solution(M, K, U, 1);

  Solution sol;
  sol.status = SolveStatus::Optimal;
  sol.U = U;
  sol.q = res.q;
  sol.t_star = res.t_star;
  sol.per_user_sinr = res.per_user_sinr;
  sol.per_user_rate = rates_from_sinrs(res.per_user_sinr);
  sol.trace = {res.t_star};
  sol.iterations = 1;
  return sol;
}

}  // namespace cfmimo
