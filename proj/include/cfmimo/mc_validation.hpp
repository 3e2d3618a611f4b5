#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cfmimo/pilots.hpp"
#include "cfmimo/rng.hpp"

namespace cfmimo {

// One realization of small-scale fading, its MMSE estimate, and the noise
// terms of an uplink slot. Per-AP antenna blocks are stacked, so row
// m*N + j is antenna j of AP m.
struct ChannelSample {
  Eigen::MatrixXcd g;            // (M N) x K true channels
  Eigen::MatrixXcd ghat;         // (M N) x K MMSE estimates
  Eigen::MatrixXcd pilot_noise;  // (M N) x tau
  Eigen::VectorXcd data_noise;   // (M N)
  Eigen::VectorXcd symbols;      // K unit-modulus data symbols
};

// Draws i.i.d. channel realizations and forms the per-sample MMSE estimates
//
//   ghat_k = c_k .* ( sqrt(tau p_p) sum_k' g_k' (phi_k'^H phi_k) + W phi_k ),
//
// the exact estimator whose second-order statistics are gamma_mk.
class ChannelSampler {
 public:
  ChannelSampler(const EstimationStats& stats, const PilotBook& pilots,
                 double p_p, int N, uint64_t seed);

  void draw(ChannelSample& s);
  void reset(uint64_t seed);

  const EstimationStats& stats() const { return *stats_; }
  const PilotBook& pilots() const { return *pilots_; }
  int M() const { return stats_->M(); }
  int K() const { return stats_->K(); }
  int N() const { return N_; }

 private:
  const EstimationStats* stats_;
  const PilotBook* pilots_;
  Eigen::MatrixXcd gram_;           // Phi^H Phi
  Eigen::MatrixXd sqrt_beta_exp_;   // (M N) x K
  Eigen::MatrixXcd c_exp_;          // (M N) x K
  double sqrt_tau_pp_ = 0;
  int N_ = 1;
  Rng rng_;
};

struct TermEstimate {
  double mc = 0;
  double std_err = 0;
  double closed_form = 0;
  double rel_gap() const;
};

struct TermEstimates {
  int user = 0;
  int n_samples = 0;
  TermEstimate ds, bu, tn;
  std::vector<int> iui_user;       // interferer indices, ascending, k omitted
  std::vector<TermEstimate> iui;   // parallel to iui_user
};

// Closed-form moments of the combined statistic for user k (direct sums over
// APs; deliberately assembled independently of the quadratic-form path).
double closed_form_ds(int k, const Eigen::Ref<const Eigen::VectorXd>& u,
                      double q_k, const EstimationStats& stats, int N, double rho);
double closed_form_bu(int k, const Eigen::Ref<const Eigen::VectorXd>& u,
                      double q_k, const EstimationStats& stats, int N, double rho);
double closed_form_iui(int k, int kp, const Eigen::Ref<const Eigen::VectorXd>& u,
                       double q_kp, const EstimationStats& stats,
                       const PilotBook& pilots, int N, double rho);
double closed_form_tn(int k, const Eigen::Ref<const Eigen::VectorXd>& u,
                      const EstimationStats& stats, int N);

// Monte Carlo estimates of the four moment groups for user k, paired with
// their closed forms. The desired-signal estimate is |sample mean|^2; the
// beamforming-uncertainty estimate is the sample variance of the same
// coefficient stream, so all terms share common random numbers. Throws
// InsufficientSamples when enforce_se is set and some standard error exceeds
// se_target relative to its estimate.
TermEstimates estimate_terms(int k, const Eigen::Ref<const Eigen::VectorXd>& u,
                             const Eigen::Ref<const Eigen::VectorXd>& q,
                             ChannelSampler& sampler, double rho, int n_samples,
                             double se_target = 0.01, bool enforce_se = false);

struct TermCheck {
  std::string term;
  double closed_form = 0;
  double mc_mean = 0;
  double std_err = 0;
  double rel_gap = 0;
  bool pass = false;
};

struct UserValidation {
  int user = 0;
  std::vector<TermCheck> terms;
  double sinr_closed = 0;
  double sinr_mc = 0;
  double sinr_rel_gap = 0;
  bool pass = false;
};

struct ValidationReport {
  int n_samples = 0;
  double term_tolerance = 0.03;
  double sinr_tolerance = 0.05;
  std::vector<UserValidation> users;
  bool pass = false;
};

struct ValidationOptions {
  int n_samples = 100000;
  double term_tolerance = 0.03;
  double sinr_tolerance = 0.05;
  uint64_t seed = 0;
};

// Validates every closed-form moment and the assembled SINR of every user
// against the Monte Carlo estimates. Each user consumes the same sample
// stream (the sampler is reseeded per user).
ValidationReport validate_closed_forms(const EstimationStats& stats,
                                       const PilotBook& pilots,
                                       const Eigen::Ref<const Eigen::MatrixXd>& U,
                                       const Eigen::Ref<const Eigen::VectorXd>& q,
                                       int N, double rho, double p_p,
                                       const ValidationOptions& opts);

std::string to_json_string(const ValidationReport& report);

}  // namespace cfmimo
