#pragma once

#include <Eigen/Dense>
#include <string>

#include "cfmimo/rng.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

struct PilotBook {
  Eigen::MatrixXcd phi;       // tau x K, unit-norm columns
  Eigen::MatrixXd gram_abs2;  // K x K, |phi_k^H phi_k'|^2

  int tau() const { return static_cast<int>(phi.rows()); }
  int K() const { return static_cast<int>(phi.cols()); }
};

PilotBook generate_pilots(int K, int tau, PilotMode mode, Rng& rng);

// Debug dump: one row per pilot symbol, re/im interleaved per user.
void dump_pilots_csv(const PilotBook& book, const std::string& path);

// Channel-estimation second-order statistics. Everything downstream of the
// estimator consumes these matrices instead of channel realizations.
//
//   c_mk     = sqrt(tau p_p) beta_mk / (tau p_p sum_k' beta_mk' |phi_k'^H phi_k|^2 + 1)
//   gamma_mk = sqrt(tau p_p) beta_mk c_mk      (per-antenna estimate power)
struct EstimationStats {
  Eigen::MatrixXd beta;             // M x K
  Eigen::MatrixXd c;                // M x K
  Eigen::MatrixXd gamma;            // M x K
  Eigen::MatrixXd gamma_over_beta;  // M x K, cached gamma ./ beta

  int M() const { return static_cast<int>(beta.rows()); }
  int K() const { return static_cast<int>(beta.cols()); }

  // Per-user statistic vectors of the closed-form rate. lambda(k, k) equals
  // Gamma(k) by construction.
  Eigen::VectorXd Gamma(int k) const { return gamma.col(k); }
  Eigen::VectorXd lambda(int k, int kp) const {
    return gamma_over_beta.col(k).cwiseProduct(beta.col(kp));
  }
  Eigen::VectorXd upsilon_diag(int k, int kp) const {
    return beta.col(kp).cwiseProduct(gamma.col(k));
  }
  Eigen::VectorXd R_diag(int k) const { return gamma.col(k); }
};

EstimationStats estimation_stats(const Eigen::MatrixXd& beta,
                                 const PilotBook& pilots, double p_p, int tau);
EstimationStats estimation_stats(const LargeScaleModel& model,
                                 const PilotBook& pilots, double p_p, int tau);

}  // namespace cfmimo
