#pragma once

#include <Eigen/Dense>
#include <vector>

#include "cfmimo/rate_model.hpp"

namespace cfmimo {

struct ReceiverSolve {
  Eigen::VectorXd u;  // unit norm
  double sinr = 0;
  int negative_entries = 0;  // soft sign check, see below
};

// Maximizes the Rayleigh quotient of the model. Because the numerator is
// rank one, the maximizer is u* = B_k^{-1} Gamma_k (normalized), with
// achieved SINR N^2 q_k Gamma_k' B_k^{-1} Gamma_k. For q_k = 0 the same
// direction is returned with SINR 0, so the alternation never stalls on a
// zero-power iterate.
//
// Entries of u* are expected to be non-negative; violations are counted
// rather than rejected (the count is a diagnostic, not an error).
ReceiverSolve optimal_receiver(const UserRateModel& model);

struct ReceiverWeights {
  Eigen::MatrixXd u;  // M x K, unit-norm columns
  int negative_entries = 0;
};

ReceiverWeights design_all(const std::vector<UserRateModel>& models);

}  // namespace cfmimo
