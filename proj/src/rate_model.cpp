#include "cfmimo/rate_model.hpp"

#include <cmath>

#include "cfmimo/errors.hpp"

namespace cfmimo {

Eigen::MatrixXd UserRateModel::dense_b() const {
  Eigen::MatrixXd b = Eigen::MatrixXd(b_diag.asDiagonal());
  if (b_rank1.cols() > 0) b.noalias() += b_rank1 * b_rank1.transpose();
  return b;
}

UserRateModel build_user_model(int k, const EstimationStats& stats,
                               const Eigen::Ref<const Eigen::VectorXd>& q,
                               const PilotBook& pilots, int N, double rho) {
  const int M = stats.M();
  const int K = stats.K();
  if (k < 0 || k >= K) throw std::out_of_range("user index out of range");
  if (q.size() != K) throw std::invalid_argument("q must have K entries");
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  if (!std::isfinite(rho) || rho <= 0) throw NonFiniteInput("rho must be positive and finite");
  if (!q.allFinite() || !stats.beta.allFinite() || !stats.gamma.allFinite())
    throw NonFiniteInput("non-finite entry in q or estimation statistics");
  if ((q.array() < 0).any()) throw std::invalid_argument("powers must be non-negative");

  UserRateModel m;
  m.user = k;
  m.N = N;
  m.q_k = q[k];
  m.rho = rho;
  m.gamma = stats.gamma.col(k);
  m.a = N * std::sqrt(q[k]) * m.gamma;
  m.b_diag = N * (stats.beta * q).cwiseProduct(m.gamma) + (N / rho) * m.gamma;

  std::vector<int> coherent;
  for (int kp = 0; kp < K; ++kp)
    if (kp != k && q[kp] * pilots.gram_abs2(k, kp) > 0) coherent.push_back(kp);
  m.b_rank1.resize(M, static_cast<int>(coherent.size()));
  for (int i = 0; i < static_cast<int>(coherent.size()); ++i) {
    const int kp = coherent[i];
    m.b_rank1.col(i) =
        N * std::sqrt(q[kp] * pilots.gram_abs2(k, kp)) * stats.lambda(k, kp);
  }
  return m;
}

std::vector<UserRateModel> build_all_models(
    const EstimationStats& stats, const Eigen::Ref<const Eigen::VectorXd>& q,
    const PilotBook& pilots, int N, double rho) {
  std::vector<UserRateModel> models;
  models.reserve(stats.K());
  for (int k = 0; k < stats.K(); ++k)
    models.push_back(build_user_model(k, stats, q, pilots, N, rho));
  return models;
}

double sinr(const Eigen::Ref<const Eigen::VectorXd>& u, const UserRateModel& model) {
  if (u.size() != model.gamma.size())
    throw std::invalid_argument("u has the wrong dimension");
  if (u.squaredNorm() == 0) throw ZeroVector("receiver weights are identically zero");
  const double s = u.dot(model.a);
  double den = u.cwiseAbs2().dot(model.b_diag);
  if (model.b_rank1.cols() > 0)
    den += (model.b_rank1.transpose() * u).squaredNorm();
  return s * s / den;
}

double rate(const Eigen::Ref<const Eigen::VectorXd>& u, const UserRateModel& model) {
  return std::log2(1.0 + sinr(u, model));
}

}  // namespace cfmimo
