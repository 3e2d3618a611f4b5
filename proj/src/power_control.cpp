#include "cfmimo/power_control.hpp"

#include <cmath>
#include <limits>

#include "cfmimo/errors.hpp"

namespace cfmimo {

std::vector<SinrLinearForm> linearize(const Eigen::Ref<const Eigen::MatrixXd>& U,
                                      const EstimationStats& stats,
                                      const PilotBook& pilots, int N, double rho) {
  const int M = stats.M();
  const int K = stats.K();
  if (U.rows() != M || U.cols() != K)
    throw std::invalid_argument("U must be M x K");
  if (!std::isfinite(rho) || rho <= 0)
    throw NonFiniteInput("rho must be positive and finite");

  std::vector<SinrLinearForm> forms(K);
  for (int k = 0; k < K; ++k) {
    const Eigen::VectorXd u = U.col(k);
    if (u.squaredNorm() == 0) throw ZeroVector("receiver column k is zero");
    const Eigen::VectorXd u2g = u.cwiseAbs2().cwiseProduct(stats.gamma.col(k));
    SinrLinearForm& f = forms[k];
    const double sg = stats.gamma.col(k).dot(u);
    f.S = static_cast<double>(N) * N * sg * sg;
    f.C = (N / rho) * u2g.sum();
    // Non-coherent part, all interferers including k itself.
    f.D = static_cast<double>(N) * (stats.beta.transpose() * u2g);
    // Coherent pilot-contamination part, k' != k only.
    const Eigen::VectorXd v = stats.gamma_over_beta.col(k).cwiseProduct(u);
    const Eigen::VectorXd proj = stats.beta.transpose() * v;  // Lambda_kk' . u
    for (int kp = 0; kp < K; ++kp) {
      if (kp == k) continue;
      f.D[kp] += static_cast<double>(N) * N * pilots.gram_abs2(k, kp) *
                 proj[kp] * proj[kp];
    }
  }
  return forms;
}

double sinr_at(const SinrLinearForm& form, int k,
               const Eigen::Ref<const Eigen::VectorXd>& q) {
  return form.S * q[k] / (form.D.dot(q) + form.C);
}

std::optional<Eigen::VectorXd> feasibility_fixed_point(
    const Eigen::Ref<const Eigen::VectorXd>& targets,
    const std::vector<SinrLinearForm>& forms,
    const Eigen::Ref<const Eigen::VectorXd>& p_max,
    const FixedPointOptions& opts) {
  const int K = static_cast<int>(forms.size());
  if (targets.size() != K || p_max.size() != K)
    throw std::invalid_argument("targets/p_max must have K entries");
  if ((targets.array() < 0).any())
    throw std::invalid_argument("targets must be non-negative");

  Eigen::VectorXd denom(K);
  for (int k = 0; k < K; ++k) {
    denom[k] = forms[k].S - targets[k] * forms[k].D[k];
    if (targets[k] > 0 && denom[k] <= 0) return std::nullopt;
  }

  Eigen::VectorXd q = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd qn(K);
  for (int it = 0; it < opts.max_iters; ++it) {
    for (int k = 0; k < K; ++k) {
      if (targets[k] == 0) {
        qn[k] = 0;
        continue;
      }
      const double interf =
          forms[k].D.dot(q) - forms[k].D[k] * q[k] + forms[k].C;
      qn[k] = targets[k] * interf / denom[k];
    }
    if ((qn - p_max).maxCoeff() > opts.tol) return std::nullopt;
    const double delta = (qn - q).cwiseAbs().maxCoeff();
    q.swap(qn);
    if (delta <= opts.tol) return q;
  }
  return std::nullopt;  // no convergence within budget
}

const char* to_string(SolveStatus status) {
  return status == SolveStatus::Optimal ? "Optimal" : "InfeasibleRtuTargets";
}

namespace {

Eigen::VectorXd eval_sinrs(const std::vector<SinrLinearForm>& forms,
                           const Eigen::VectorXd& q) {
  Eigen::VectorXd s(forms.size());
  for (size_t k = 0; k < forms.size(); ++k)
    s[static_cast<int>(k)] = sinr_at(forms[k], static_cast<int>(k), q);
  return s;
}

PowerSolveResult finish(const std::vector<SinrLinearForm>& forms,
                        Eigen::VectorXd q, int K1, int probes,
                        const Eigen::Ref<const Eigen::VectorXd>& p_max,
                        bool scale_to_full_power) {
  const int K = static_cast<int>(forms.size());
  if (scale_to_full_power) {
    const double h = q.cwiseQuotient(p_max).maxCoeff();
    if (h > 0) q = (q / h).cwiseMin(p_max);
  }
  PowerSolveResult res;
  res.status = SolveStatus::Optimal;
  res.q = std::move(q);
  res.bisection_iters = probes;
  res.per_user_sinr = eval_sinrs(forms, res.q);
  res.t_star = K1 < K ? res.per_user_sinr.tail(K - K1).minCoeff() : 0.0;
  return res;
}

}  // namespace

PowerSolveResult solve_power(const std::vector<SinrLinearForm>& forms,
                             const Eigen::Ref<const Eigen::VectorXd>& rtu_targets,
                             const Eigen::Ref<const Eigen::VectorXd>& p_max,
                             const PowerSolveOptions& opts) {
  const int K = static_cast<int>(forms.size());
  const int K1 = static_cast<int>(rtu_targets.size());
  if (K1 > K) throw std::invalid_argument("more RTU targets than users");
  if ((rtu_targets.array() <= 0).any())
    throw std::invalid_argument("RTU targets must be positive");

  int probes = 0;
  auto probe = [&](double t) {
    Eigen::VectorXd targets(K);
    targets.head(K1) = rtu_targets;
    targets.tail(K - K1).setConstant(t);
    ++probes;
    return feasibility_fixed_point(targets, forms, p_max, opts.fp);
  };

  // Feasibility of the fixed targets alone decides the status.
  auto q0 = probe(0.0);
  if (!q0) {
    PowerSolveResult res;
    res.status = SolveStatus::InfeasibleRtuTargets;
    res.q = Eigen::VectorXd::Zero(K);
    res.per_user_sinr = Eigen::VectorXd::Zero(K);
    res.bisection_iters = probes;
    return res;
  }
  if (K1 == K) return finish(forms, std::move(*q0), K1, probes, p_max, false);

  // Upper bound: each max-min user served alone at full power.
  double t_up = std::numeric_limits<double>::infinity();
  for (int k = K1; k < K; ++k) {
    const auto& f = forms[k];
    t_up = std::min(t_up, f.S * p_max[k] / (f.D[k] * p_max[k] + f.C));
  }
  if (!(t_up > 0)) return finish(forms, std::move(*q0), K1, probes, p_max, false);

  double t_low = 0;
  Eigen::VectorXd q_low = std::move(*q0);
  if (opts.t_floor > 0) {
    const double tf = std::min(opts.t_floor, t_up);
    if (auto qf = probe(tf)) {
      t_low = tf;
      q_low = std::move(*qf);
    }
  }
  // The upper bound itself is feasible only when the binding user sees no
  // interference; in that corner it is the exact optimum.
  if (auto qup = probe(t_up)) {
    t_low = t_up;
    q_low = std::move(*qup);
  }

  double h = q_low.cwiseQuotient(p_max).maxCoeff();
  while (probes < opts.max_probes &&
         (t_up - t_low > opts.bisect_tol * std::max(1.0, t_low) ||
          h < 1.0 - opts.full_power_tol)) {
    if (t_up - t_low <= 1e-15 * std::max(1.0, t_up)) break;  // bracket exhausted
    const double t_mid = 0.5 * (t_low + t_up);
    if (auto qm = probe(t_mid)) {
      t_low = t_mid;
      q_low = std::move(*qm);
      h = q_low.cwiseQuotient(p_max).maxCoeff();
    } else {
      t_up = t_mid;
    }
  }
  return finish(forms, std::move(q_low), K1, probes, p_max, true);
}

}  // namespace cfmimo
