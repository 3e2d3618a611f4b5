#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cfmimo/pilots.hpp"

namespace cfmimo {

// Quadratic-form view of the closed-form uplink SINR of user k,
//
//   SINR_k(u) = (u' A_k u) / (u' B_k u),
//
// with A_k = a a' rank one and B_k = diag(b_diag) + b_rank1 b_rank1'. The
// diagonal part carries the non-coherent interference and noise; each rank-one
// column carries the coherent pilot-contamination term of one interferer.
struct UserRateModel {
  int user = 0;
  int N = 1;
  double q_k = 0;
  double rho = 1;
  Eigen::VectorXd gamma;    // Gamma_k (also the diagonal of R_k)
  Eigen::VectorXd a;        // N sqrt(q_k) Gamma_k
  Eigen::VectorXd b_diag;   // N sum_k' q_k' beta_mk' gamma_mk + (N/rho) gamma_mk
  Eigen::MatrixXd b_rank1;  // M x (#coherent interferers)

  Eigen::MatrixXd dense_b() const;
};

UserRateModel build_user_model(int k, const EstimationStats& stats,
                               const Eigen::Ref<const Eigen::VectorXd>& q,
                               const PilotBook& pilots, int N, double rho);

std::vector<UserRateModel> build_all_models(
    const EstimationStats& stats, const Eigen::Ref<const Eigen::VectorXd>& q,
    const PilotBook& pilots, int N, double rho);

// Rayleigh quotient of the model at u; scale-invariant in u.
double sinr(const Eigen::Ref<const Eigen::VectorXd>& u, const UserRateModel& model);

// log2(1 + sinr), bits/s/Hz.
double rate(const Eigen::Ref<const Eigen::VectorXd>& u, const UserRateModel& model);

}  // namespace cfmimo
