#include "cfmimo/pilots.hpp"

#include <cmath>
#include <fstream>

#include "cfmimo/errors.hpp"

namespace cfmimo {

PilotBook generate_pilots(int K, int tau, PilotMode mode, Rng& rng) {
  if (K < 1 || tau < 1) throw ConfigError("pilot book needs K >= 1 and tau >= 1");
  PilotBook book;
  book.phi.resize(tau, K);
  if (mode == PilotMode::OrthogonalIfPossible) {
    if (tau < K) {
      throw OrthogonalImpossible(
          "orthogonal pilots impossible: tau < K (" + std::to_string(tau) +
          " < " + std::to_string(K) + ")");
    }
    // Random orthonormal columns: thin Q factor of a Gaussian matrix.
    Eigen::MatrixXcd raw(tau, K);
    for (int k = 0; k < K; ++k)
      for (int t = 0; t < tau; ++t) raw(t, k) = rng.cnormal();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(raw);
    book.phi = qr.householderQ() * Eigen::MatrixXcd::Identity(tau, K);
    // Orthogonal by construction; do not leave roundoff in the gram.
    book.gram_abs2 = Eigen::MatrixXd::Identity(K, K);
  } else {
    for (int k = 0; k < K; ++k) {
      for (int t = 0; t < tau; ++t) book.phi(t, k) = rng.cnormal();
      book.phi.col(k).normalize();
    }
    book.gram_abs2 = (book.phi.adjoint() * book.phi).cwiseAbs2();
  }
  return book;
}

void dump_pilots_csv(const PilotBook& book, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path);
  out.precision(17);
  for (int t = 0; t < book.tau(); ++t) {
    for (int k = 0; k < book.K(); ++k) {
      if (k > 0) out << ',';
      out << book.phi(t, k).real() << ',' << book.phi(t, k).imag();
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

EstimationStats estimation_stats(const Eigen::MatrixXd& beta,
                                 const PilotBook& pilots, double p_p, int tau) {
  if (!(p_p > 0) || !std::isfinite(p_p)) throw ConfigError("p_p must be positive and finite");
  if (tau != pilots.tau()) throw ConfigError("tau does not match the pilot book");
  if (beta.cols() != pilots.K()) throw ConfigError("beta and pilot book disagree on K");
  if (!beta.allFinite() || (beta.array() <= 0).any())
    throw NonFiniteInput("beta must be positive and finite");

  const double tpp = static_cast<double>(tau) * p_p;
  const double sqrt_tpp = std::sqrt(tpp);
  EstimationStats s;
  s.beta = beta;
  // Denominator: tau p_p sum_k' beta_mk' |phi_k'^H phi_k|^2 + 1, always >= 1.
  Eigen::MatrixXd denom = tpp * (beta * pilots.gram_abs2);
  denom.array() += 1.0;
  s.c = sqrt_tpp * beta.cwiseQuotient(denom);
  s.gamma = sqrt_tpp * beta.cwiseProduct(s.c);
  s.gamma_over_beta = s.gamma.cwiseQuotient(beta);
  return s;
}

EstimationStats estimation_stats(const LargeScaleModel& model,
                                 const PilotBook& pilots, double p_p, int tau) {
  return estimation_stats(model.beta, pilots, p_p, tau);
}

}  // namespace cfmimo
