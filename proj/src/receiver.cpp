#include "cfmimo/receiver.hpp"

#include "cfmimo/errors.hpp"

namespace cfmimo {

ReceiverSolve optimal_receiver(const UserRateModel& model) {
  Eigen::LLT<Eigen::MatrixXd> llt(model.dense_b());
  if (llt.info() != Eigen::Success)
    throw SingularDenominator("Cholesky of B failed for user " +
                              std::to_string(model.user));
  Eigen::VectorXd x = llt.solve(model.gamma);
  const double quad = model.gamma.dot(x);  // Gamma' B^{-1} Gamma > 0
  ReceiverSolve out;
  out.sinr = static_cast<double>(model.N) * model.N * model.q_k * quad;
  if (x.sum() < 0) x = -x;
  out.u = x.normalized();
  out.negative_entries = static_cast<int>((out.u.array() < -1e-12).count());
  return out;
}

ReceiverWeights design_all(const std::vector<UserRateModel>& models) {
  if (models.empty()) throw EmptyInput("design_all needs at least one model");
  const int M = static_cast<int>(models.front().gamma.size());
  ReceiverWeights w;
  w.u.resize(M, static_cast<int>(models.size()));
  for (size_t k = 0; k < models.size(); ++k) {
    ReceiverSolve s = optimal_receiver(models[k]);
    w.u.col(static_cast<int>(k)) = s.u;
    w.negative_entries += s.negative_entries;
  }
  return w;
}

}  // namespace cfmimo
