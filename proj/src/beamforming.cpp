#include "ramec/beamforming.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ramec {

namespace {
constexpr double kT2Tol = 1e-8;  ///< relative width for the t2 bisection
constexpr int kT2Iters = 200;
}  // namespace

CovarianceSet make_covariances(const std::vector<Eigen::VectorXcd>& channels) {
  CovarianceSet cov;
  cov.reserve(channels.size());
  for (const auto& h : channels) cov.push_back(h * h.adjoint());
  return cov;
}

double sinr(const Eigen::VectorXcd& w, const std::vector<Eigen::VectorXcd>& channels,
            int k, const std::vector<double>& powers_w, double sigma2_w) {
  const std::size_t K = channels.size();
  double interference = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    if (j == static_cast<std::size_t>(k)) continue;
    interference += powers_w[j] * std::norm(w.dot(channels[j]));
  }
  return powers_w[static_cast<std::size_t>(k)] *
         std::norm(w.dot(channels[static_cast<std::size_t>(k)])) /
         (interference + sigma2_w);
}

double sinr_cov(const Eigen::VectorXcd& w, const CovarianceSet& cov, int k,
                const std::vector<double>& powers_w, double sigma2_w) {
  double interference = 0.0;
  for (std::size_t j = 0; j < cov.size(); ++j) {
    if (j == static_cast<std::size_t>(k)) continue;
    interference += powers_w[j] * std::real(w.dot(cov[j] * w));
  }
  return powers_w[static_cast<std::size_t>(k)] *
         std::real(w.dot(cov[static_cast<std::size_t>(k)] * w)) / (interference + sigma2_w);
}

std::pair<Eigen::VectorXcd, double> mmse_beamformer(
    const std::vector<Eigen::VectorXcd>& channels, int k,
    const std::vector<double>& powers_w, double sigma2_w) {
  if (!(sigma2_w > 0.0))
    throw std::invalid_argument("mmse_beamformer: noise power must be positive");
  const auto N = channels[static_cast<std::size_t>(k)].size();
  Eigen::MatrixXcd M = sigma2_w * Eigen::MatrixXcd::Identity(N, N);
  for (std::size_t j = 0; j < channels.size(); ++j) {
    if (j == static_cast<std::size_t>(k)) continue;
    M.noalias() += powers_w[j] * (channels[j] * channels[j].adjoint());
  }
  const Eigen::VectorXcd& hk = channels[static_cast<std::size_t>(k)];
  Eigen::VectorXcd x = M.llt().solve(hk);
  const double gamma =
      powers_w[static_cast<std::size_t>(k)] * std::real(hk.dot(x));
  const double nrm = x.norm();
  if (nrm > 0.0) x /= nrm;
  return {x, gamma};
}

SdrResult sdr_feasibility(const std::vector<double>& gamma_req, const CovarianceSet& cov,
                          const std::vector<double>& powers_w, double sigma2_w) {
  const std::size_t K = cov.size();
  SdrResult res;
  res.feasible = true;
  res.device_feasible.assign(K, 0);
  res.lambda_max.assign(K, 0.0);
  res.top_vec.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double gamma = gamma_req[k];
    if (!(gamma >= 0.0))
      throw std::invalid_argument("sdr_feasibility: required SINR must be nonnegative");
    if (!std::isfinite(gamma)) {
      res.feasible = false;
      res.top_vec[k] = Eigen::VectorXcd::Zero(cov[k].rows());
      res.lambda_max[k] = -std::numeric_limits<double>::infinity();
      continue;
    }
    Eigen::MatrixXcd M = powers_w[k] * cov[k];
    for (std::size_t j = 0; j < K; ++j) {
      if (j == k) continue;
      M.noalias() -= (gamma * powers_w[j]) * cov[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(M);
    const auto last = M.rows() - 1;
    res.lambda_max[k] = eig.eigenvalues()(last);
    res.top_vec[k] = eig.eigenvectors().col(last);
    res.device_feasible[k] = res.lambda_max[k] >= gamma * sigma2_w ? 1 : 0;
    if (!res.device_feasible[k]) res.feasible = false;
  }
  return res;
}

Eigen::VectorXcd gaussian_randomization(const Eigen::MatrixXcd& W, const CovarianceSet& cov,
                                        int k, const std::vector<double>& powers_w,
                                        double sigma2_w, int samples, std::mt19937_64& rng) {
  if (samples <= 0) throw std::invalid_argument("gaussian_randomization: samples must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(W);
  const auto N = W.rows();

  // Candidate 0: the top eigenvector, exact for rank-one W.
  Eigen::VectorXcd best = eig.eigenvectors().col(N - 1);
  double best_sinr = sinr_cov(best, cov, k, powers_w, sigma2_w);

  Eigen::MatrixXcd sqrt_w = Eigen::MatrixXcd::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double lam = std::max(0.0, eig.eigenvalues()(i));
    sqrt_w.noalias() += std::sqrt(lam) * (eig.eigenvectors().col(i) *
                                          eig.eigenvectors().col(i).adjoint());
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXcd z(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      z(i) = std::complex<double>(re, im) / std::numbers::sqrt2;
    }
    Eigen::VectorXcd cand = sqrt_w * z;
    const double nrm = cand.norm();
    if (nrm <= 0.0) continue;
    cand /= nrm;
    const double g = sinr_cov(cand, cov, k, powers_w, sigma2_w);
    if (g > best_sinr) {
      best_sinr = g;
      best = cand;
    }
  }
  return best;
}

namespace {

/// Latency contribution of device k under rate R, excluding the frozen
/// offload-compute slack: L c fe / (fe fl + c R (fe + fl)).
double rate_term(double L, double c, double fl, double fe, double R) {
  if (fe <= 0.0) return 0.0;
  return L * c * fe / (fe * fl + c * R * (fe + fl));
}

/// Required SINR for device k so that rate_term + t3 <= t2.
double required_gamma(double L, double c, double fl, double fe, double bandwidth,
                      double t2, double t3) {
  if (fe <= 0.0) return 0.0;
  const double slack = t2 - t3;
  if (slack <= 0.0) return std::numeric_limits<double>::infinity();
  double rate_req = (L * c * fe / slack - fe * fl) / (c * (fe + fl));
  if (rate_req <= 0.0) return 0.0;
  return std::exp2(rate_req / bandwidth) - 1.0;
}

}  // namespace

BeamformingOutcome bisection_beamforming(const Scenario& scn,
                                         const std::vector<Eigen::VectorXcd>& channels,
                                         const Allocation& alloc) {
  const std::size_t K = static_cast<std::size_t>(scn.K);
  const std::vector<double> powers = scn.powers_w();
  const double sigma2 = scn.noise_w();
  const CovarianceSet cov = make_covariances(channels);

  std::vector<double> t3(K, 0.0);
  for (std::size_t k = 0; k < K; ++k)
    if (alloc.fe[k] > 0.0) t3[k] = alloc.ell[k] * scn.cycles_per_bit[k] / alloc.fe[k];

  // Feasible upper bracket: the slack achieved by the exact per-device MMSE
  // optima, inflated by a hair so the boundary probe cannot fail.
  double t2_mmse = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const auto [w, gamma] = mmse_beamformer(channels, static_cast<int>(k), powers, sigma2);
    const double rate = scn.bandwidth_hz * std::log2(1.0 + gamma);
    t2_mmse = std::max(t2_mmse, rate_term(scn.task_bits[k], scn.cycles_per_bit[k],
                                          scn.local_cps[k], alloc.fe[k], rate) +
                                    t3[k]);
  }

  double lo = 0.0;
  for (double v : t3) lo = std::max(lo, v);
  double hi = t2_mmse * (1.0 + 1e-6);

  const auto probe = [&](double t2) {
    std::vector<double> gamma_req(K);
    for (std::size_t k = 0; k < K; ++k)
      gamma_req[k] = required_gamma(scn.task_bits[k], scn.cycles_per_bit[k],
                                    scn.local_cps[k], alloc.fe[k], scn.bandwidth_hz, t2, t3[k]);
    return sdr_feasibility(gamma_req, cov, powers, sigma2);
  };

  for (int it = 0; it < kT2Iters && (hi - lo) > kT2Tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid).feasible)
      hi = mid;
    else
      lo = mid;
  }

  SdrResult final = probe(hi);

  BeamformingOutcome out;
  out.t2 = hi;
  out.w.w.resize(K);
  out.gammas.resize(K);
  out.rates_bps.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    out.w.w[k] = final.top_vec[k];
    out.gammas[k] = sinr(out.w.w[k], channels, static_cast<int>(k), powers, sigma2);
    out.rates_bps[k] = scn.bandwidth_hz * std::log2(1.0 + out.gammas[k]);
  }
  return out;
}

}  // namespace ramec
