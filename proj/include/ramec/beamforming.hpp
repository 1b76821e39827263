#pragma once

#include "ramec/compute_alloc.hpp"
#include "ramec/scenario.hpp"

#include <Eigen/Dense>

#include <random>
#include <utility>
#include <vector>

namespace ramec {

/**
 * @file beamforming.hpp
 * @brief Receive-beamformer optimization for fixed boresights.
 *
 * Per device the SINR constraint decouples, so the semidefinite relaxation of
 * the unit-trace feasibility problem is solved exactly by a top-eigenpair
 * test; an MMSE closed form provides the independent per-device optimum used
 * as bracket and cross-check. The latency bisection searches the smallest
 * slack t2 for which every device's required SINR is attainable.
 */

struct BeamformerSet {
  std::vector<Eigen::VectorXcd> w;  ///< one unit vector per device
};

/// Rank-one channel outer products h_k h_k^H.
using CovarianceSet = std::vector<Eigen::MatrixXcd>;

CovarianceSet make_covariances(const std::vector<Eigen::VectorXcd>& channels);

/// SINR of device k under beamformer w: P_k |w^H h_k|^2 over interference
/// plus noise.
double sinr(const Eigen::VectorXcd& w, const std::vector<Eigen::VectorXcd>& channels,
            int k, const std::vector<double>& powers_w, double sigma2_w);

/// Same via the covariance quadratic forms w^H H_j w.
double sinr_cov(const Eigen::VectorXcd& w, const CovarianceSet& cov, int k,
                const std::vector<double>& powers_w, double sigma2_w);

/// Exact per-device SINR maximizer w proportional to
/// (sum_{j != k} P_j h_j h_j^H + sigma^2 I)^{-1} h_k, and the attained maximum
/// gamma = P_k h_k^H (.)^{-1} h_k.
std::pair<Eigen::VectorXcd, double> mmse_beamformer(
    const std::vector<Eigen::VectorXcd>& channels, int k,
    const std::vector<double>& powers_w, double sigma2_w);

struct SdrResult {
  bool feasible;                          ///< all devices feasible
  std::vector<char> device_feasible;      ///< per-device decision
  std::vector<double> lambda_max;         ///< top eigenvalue of the test matrix
  std::vector<Eigen::VectorXcd> top_vec;  ///< unit top eigenvector (rank-one W)
};

/// Decide, per device, whether a unit beamformer attaining gamma_req exists.
/// The unit-trace relaxation max tr(W M) with M = P_k H_k - gamma sum P_j H_j
/// peaks at the top eigenpair, so the decision lambda_max(M) >= gamma sigma^2
/// is exact and the top eigenvector is an optimal rank-one solution.
SdrResult sdr_feasibility(const std::vector<double>& gamma_req, const CovarianceSet& cov,
                          const std::vector<double>& powers_w, double sigma2_w);

/// Draw `samples` vectors from CN(0, W), normalize, and return the best by
/// SINR. The top eigenvector of W is always candidate 0, so for rank-one W
/// the result is exact.
Eigen::VectorXcd gaussian_randomization(const Eigen::MatrixXcd& W, const CovarianceSet& cov,
                                        int k, const std::vector<double>& powers_w,
                                        double sigma2_w, int samples, std::mt19937_64& rng);

struct BeamformingOutcome {
  BeamformerSet w;
  std::vector<double> gammas;     ///< achieved SINRs of the returned beamformers
  std::vector<double> rates_bps;  ///< B log2(1 + gamma)
  double t2;                      ///< smallest feasible latency slack found
};

/// Bisection on the latency slack t2. Each probe inverts the per-device
/// latency constraint into a required rate, maps it to a required SINR, and
/// asks sdr_feasibility. The offload-compute slack t3 = ell c / fe is frozen
/// at the allocation produced by the preceding allocation step.
BeamformingOutcome bisection_beamforming(const Scenario& scn,
                                         const std::vector<Eigen::VectorXcd>& channels,
                                         const Allocation& alloc);

}  // namespace ramec
