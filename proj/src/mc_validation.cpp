#include "cfmimo/mc_validation.hpp"

#include <cmath>
#include <complex>

#include <json.hpp>

#include "cfmimo/errors.hpp"
#include "cfmimo/rate_model.hpp"

namespace cfmimo {

namespace {
constexpr double kTinyFloor = 1e-300;

double sq(double x) { return x * x; }

double sample_std(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  if (n < 2) return 0;
  const double mean = x.mean();
  return std::sqrt((x.array() - mean).square().sum() / (n - 1));
}
}  // namespace

ChannelSampler::ChannelSampler(const EstimationStats& stats,
                               const PilotBook& pilots, double p_p, int N,
                               uint64_t seed)
    : stats_(&stats), pilots_(&pilots), N_(N), rng_(seed) {
  if (!(p_p > 0)) throw ConfigError("p_p must be positive");
  if (N < 1) throw ConfigError("N must be >= 1");
  if (stats.K() != pilots.K()) throw ConfigError("stats and pilots disagree on K");
  const int M = stats.M(), K = stats.K();
  gram_ = pilots.phi.adjoint() * pilots.phi;
  sqrt_tau_pp_ = std::sqrt(static_cast<double>(pilots.tau()) * p_p);
  sqrt_beta_exp_.resize(M * N, K);
  c_exp_.resize(M * N, K);
  for (int k = 0; k < K; ++k) {
    for (int m = 0; m < M; ++m) {
      sqrt_beta_exp_.block(m * N, k, N, 1).setConstant(std::sqrt(stats.beta(m, k)));
      c_exp_.block(m * N, k, N, 1).setConstant(stats.c(m, k));
    }
  }
}

void ChannelSampler::reset(uint64_t seed) { rng_ = Rng(seed); }

void ChannelSampler::draw(ChannelSample& s) {
  const int MN = static_cast<int>(sqrt_beta_exp_.rows());
  const int K = stats_->K();
  const int tau = pilots_->tau();
  s.g.resize(MN, K);
  s.pilot_noise.resize(MN, tau);
  s.data_noise.resize(MN);
  s.symbols.resize(K);
  // Draw order: channels (column-major), pilot noise, data noise, symbols.
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < MN; ++i) s.g(i, k) = sqrt_beta_exp_(i, k) * rng_.cnormal();
  for (int t = 0; t < tau; ++t)
    for (int i = 0; i < MN; ++i) s.pilot_noise(i, t) = rng_.cnormal();
  for (int i = 0; i < MN; ++i) s.data_noise(i) = rng_.cnormal();
  for (int k = 0; k < K; ++k) s.symbols(k) = rng_.unit_circle();

  // (g * gram).col(k) = sum_k' g_k' (phi_k'^H phi_k); the k' = k term enters
  // with weight 1, matching the estimator.
  s.ghat = c_exp_.cwiseProduct(sqrt_tau_pp_ * (s.g * gram_) +
                               s.pilot_noise * pilots_->phi);
}

double TermEstimate::rel_gap() const {
  return std::abs(mc - closed_form) / std::max(std::abs(closed_form), kTinyFloor);
}

double closed_form_ds(int k, const Eigen::Ref<const Eigen::VectorXd>& u,
                      double q_k, const EstimationStats& stats, int N, double rho) {
  double acc = 0;
  for (int m = 0; m < stats.M(); ++m) acc += u[m] * stats.gamma(m, k);
  return rho * q_k * sq(N * acc);
}

double closed_form_bu(int k, const Eigen::Ref<const Eigen::VectorXd>& u,
                      double q_k, const EstimationStats& stats, int N, double rho) {
  double acc = 0;
  for (int m = 0; m < stats.M(); ++m)
    acc += u[m] * u[m] * stats.gamma(m, k) * stats.beta(m, k);
  return rho * N * q_k * acc;
}

double closed_form_iui(int k, int kp, const Eigen::Ref<const Eigen::VectorXd>& u,
                       double q_kp, const EstimationStats& stats,
                       const PilotBook& pilots, int N, double rho) {
  double noncoh = 0, coh = 0;
  for (int m = 0; m < stats.M(); ++m) {
    noncoh += u[m] * u[m] * stats.beta(m, kp) * stats.gamma(m, k);
    coh += u[m] * stats.gamma(m, k) * stats.beta(m, kp) / stats.beta(m, k);
  }
  return N * rho * q_kp * noncoh +
         static_cast<double>(N) * N * rho * q_kp * pilots.gram_abs2(k, kp) * sq(coh);
}

double closed_form_tn(int k, const Eigen::Ref<const Eigen::VectorXd>& u,
                      const EstimationStats& stats, int N) {
  double acc = 0;
  for (int m = 0; m < stats.M(); ++m) acc += u[m] * u[m] * stats.gamma(m, k);
  return N * acc;
}

TermEstimates estimate_terms(int k, const Eigen::Ref<const Eigen::VectorXd>& u,
                             const Eigen::Ref<const Eigen::VectorXd>& q,
                             ChannelSampler& sampler, double rho, int n_samples,
                             double se_target, bool enforce_se) {
  const int M = sampler.M(), K = sampler.K(), N = sampler.N();
  if (k < 0 || k >= K) throw std::out_of_range("user index out of range");
  if (u.size() != M) throw std::invalid_argument("u must have M entries");
  if (q.size() != K) throw std::invalid_argument("q must have K entries");
  if (n_samples < 2) throw InsufficientSamples("need at least 2 samples");

  Eigen::VectorXcd u_exp(M * N);
  for (int m = 0; m < M; ++m) u_exp.segment(m * N, N).setConstant(u[m]);

  Eigen::VectorXcd a(n_samples);
  Eigen::MatrixXd iui2(n_samples, K);
  Eigen::VectorXd tn2(n_samples);
  ChannelSample s;
  for (int it = 0; it < n_samples; ++it) {
    sampler.draw(s);
    const Eigen::VectorXcd w = s.ghat.col(k).conjugate().cwiseProduct(u_exp);
    const Eigen::RowVectorXcd r = w.transpose() * s.g;
    a[it] = r[k];
    for (int kp = 0; kp < K; ++kp) iui2(it, kp) = std::norm(r[kp]);
    tn2[it] = std::norm((w.transpose() * s.data_noise)(0));
  }

  const std::complex<double> mean_a = a.mean();
  const Eigen::VectorXcd dev = a.array() - mean_a;
  const Eigen::VectorXd dev2 = dev.cwiseAbs2();
  const double var_a = dev2.sum() / (n_samples - 1);
  const double sqrt_n = std::sqrt(static_cast<double>(n_samples));

  TermEstimates est;
  est.user = k;
  est.n_samples = n_samples;

  est.ds.mc = rho * q[k] * std::norm(mean_a);
  const double abs_mean = std::abs(mean_a);
  if (abs_mean > 0) {
    // Delta method along the mean direction.
    const std::complex<double> dir = mean_a / abs_mean;
    const Eigen::VectorXd proj = (dev.array() * std::conj(dir)).real();
    est.ds.std_err = rho * q[k] * 2.0 * abs_mean * sample_std(proj) / sqrt_n;
  }
  est.ds.closed_form = closed_form_ds(k, u, q[k], sampler.stats(), N, rho);

  est.bu.mc = rho * q[k] * var_a;
  est.bu.std_err = rho * q[k] * sample_std(dev2) / sqrt_n;
  est.bu.closed_form = closed_form_bu(k, u, q[k], sampler.stats(), N, rho);

  est.tn.mc = tn2.mean();
  est.tn.std_err = sample_std(tn2) / sqrt_n;
  est.tn.closed_form = closed_form_tn(k, u, sampler.stats(), N);

  for (int kp = 0; kp < K; ++kp) {
    if (kp == k) continue;
    TermEstimate te;
    te.mc = rho * q[kp] * iui2.col(kp).mean();
    te.std_err = rho * q[kp] * sample_std(iui2.col(kp)) / sqrt_n;
    te.closed_form =
        closed_form_iui(k, kp, u, q[kp], sampler.stats(), sampler.pilots(), N, rho);
    est.iui_user.push_back(kp);
    est.iui.push_back(te);
  }

  if (enforce_se) {
    auto check = [&](const TermEstimate& te, const std::string& name) {
      if (te.std_err > se_target * std::max(std::abs(te.mc), kTinyFloor))
        throw InsufficientSamples("standard error target unmet for " + name +
                                  " of user " + std::to_string(k));
    };
    check(est.ds, "DS");
    check(est.bu, "BU");
    check(est.tn, "TN");
    for (size_t i = 0; i < est.iui.size(); ++i)
      check(est.iui[i], "IUI(" + std::to_string(est.iui_user[i]) + ")");
  }
  return est;
}

ValidationReport validate_closed_forms(const EstimationStats& stats,
                                       const PilotBook& pilots,
                                       const Eigen::Ref<const Eigen::MatrixXd>& U,
                                       const Eigen::Ref<const Eigen::VectorXd>& q,
                                       int N, double rho, double p_p,
                                       const ValidationOptions& opts) {
  ValidationReport report;
  report.n_samples = opts.n_samples;
  report.term_tolerance = opts.term_tolerance;
  report.sinr_tolerance = opts.sinr_tolerance;
  report.pass = true;

  ChannelSampler sampler(stats, pilots, p_p, N, opts.seed);
  for (int k = 0; k < stats.K(); ++k) {
    sampler.reset(opts.seed);  // common random numbers across users
    const TermEstimates est =
        estimate_terms(k, U.col(k), q, sampler, rho, opts.n_samples);

    UserValidation uv;
    uv.user = k;
    auto push = [&](const TermEstimate& te, std::string name) {
      TermCheck tc;
      tc.term = std::move(name);
      tc.closed_form = te.closed_form;
      tc.mc_mean = te.mc;
      tc.std_err = te.std_err;
      tc.rel_gap = te.rel_gap();
      tc.pass = tc.rel_gap <= opts.term_tolerance;
      uv.terms.push_back(std::move(tc));
    };
    push(est.ds, "DS");
    push(est.bu, "BU");
    for (size_t i = 0; i < est.iui.size(); ++i)
      push(est.iui[i], "IUI(" + std::to_string(est.iui_user[i]) + ")");
    push(est.tn, "TN");

    double denom_mc = est.bu.mc + est.tn.mc;
    for (const auto& te : est.iui) denom_mc += te.mc;
    uv.sinr_mc = est.ds.mc / denom_mc;
    uv.sinr_closed = sinr(U.col(k), build_user_model(k, stats, q, pilots, N, rho));
    uv.sinr_rel_gap = std::abs(uv.sinr_mc - uv.sinr_closed) /
                      std::max(uv.sinr_closed, kTinyFloor);

    uv.pass = uv.sinr_rel_gap <= opts.sinr_tolerance;
    for (const auto& tc : uv.terms) uv.pass = uv.pass && tc.pass;
    report.pass = report.pass && uv.pass;
    report.users.push_back(std::move(uv));
  }
  return report;
}

std::string to_json_string(const ValidationReport& report) {
  nlohmann::json j;
  j["schema"] = "cfmimo.validation.v1";
  j["n_samples"] = report.n_samples;
  j["term_tolerance"] = report.term_tolerance;
  j["sinr_tolerance"] = report.sinr_tolerance;
  j["pass"] = report.pass;
  j["users"] = nlohmann::json::array();
  for (const auto& uv : report.users) {
    nlohmann::json ju;
    ju["user"] = uv.user;
    ju["sinr_closed"] = uv.sinr_closed;
    ju["sinr_mc"] = uv.sinr_mc;
    ju["sinr_rel_gap"] = uv.sinr_rel_gap;
    ju["pass"] = uv.pass;
    ju["terms"] = nlohmann::json::array();
    for (const auto& tc : uv.terms) {
      ju["terms"].push_back({{"term", tc.term},
                             {"closed_form", tc.closed_form},
                             {"mc_mean", tc.mc_mean},
                             {"std_err", tc.std_err},
                             {"rel_gap", tc.rel_gap},
                             {"pass", tc.pass}});
    }
    j["users"].push_back(std::move(ju));
  }
  return j.dump(2);
}

}  // namespace cfmimo
