#pragma once

#include "ramec/scenario.hpp"

#include <Eigen/Dense>

#include <complex>
#include <random>
#include <vector>

namespace ramec {

/**
 * @file channel.hpp
 * @brief Directional Rician channel synthesis h_k(F) and its boresight derivative.
 *
 * Each antenna entry is
 *   h_{k,n}(f_n) = beta_tilde_{k,n} * max(f_n . qhat_{k,n}, 0)^p + nu_{k,n},
 * where beta_tilde collects the large-scale gain, boresight gain, Rician LoS
 * weight and propagation phase, and nu is the frozen (F-independent) NLoS term.
 * The NLoS draws are frozen at construction so h_k(F) is a pure function of F.
 */

/// Directional radiation pattern parameters. The default pattern carries the
/// power-conserving boresight gain 2(2p+1); the isotropic benchmark overrides
/// it with g0 = 1, p = 0.
struct RadiationPattern {
  double g0;
  double p;
};

/// Boresight gain 2(2p+1) that makes the pattern integrate to 4*pi.
double boresight_gain(double p);

RadiationPattern directional_pattern(double p);
RadiationPattern isotropic_pattern();

/// Radiation pattern g0 * cos_eps^(2p) on the front half space, 0 behind.
double directional_gain(double cos_eps, double p);
double directional_gain(double cos_eps, double p, double g0);

/// Large-scale power gain zeta0 * d^(-alpha0) referenced to 1 m.
double large_scale_gain(double d, double zeta0_linear, double alpha0);

/// N boresight unit vectors, one per antenna.
struct DeflectionMatrix {
  std::vector<Eigen::Vector3d> f;

  static DeflectionMatrix boresight(int n);  ///< all antennas at e1
  int size() const { return static_cast<int>(f.size()); }
  /// Throws if any vector is not unit length or exceeds the zenith cone.
  void validate(double theta_max_rad) const;
};

/// Frozen per-trial fading plus everything geometry-derived that channel
/// evaluation needs. Immutable after construction; evaluation is pure.
struct ChannelRealization {
  Geometry geom;
  RadiationPattern pattern;
  std::vector<double> kappa;    ///< per device
  Eigen::MatrixXcd nlos_draws;  ///< K x N standard circular Gaussian
  Eigen::MatrixXd large_scale;  ///< K x N linear power gains L(d)
  Eigen::MatrixXcd los_phase;   ///< K x N unit-modulus e^{-j 2 pi d / lambda}
  Eigen::MatrixXcd beta_tilde;  ///< K x N LoS coefficients
  Eigen::MatrixXcd nlos_term;   ///< K x N sqrt(L/(kappa+1)) * draw

  int devices() const { return static_cast<int>(nlos_draws.rows()); }
  int antennas() const { return static_cast<int>(nlos_draws.cols()); }
};

/// K x N standard circular Gaussian draws (unit variance per entry).
Eigen::MatrixXcd draw_nlos(int k, int n, std::mt19937_64& rng);

ChannelRealization make_realization(const Scenario& scn, const Geometry& geom,
                                    const Eigen::MatrixXcd& nlos_draws,
                                    const RadiationPattern& pattern);
ChannelRealization make_realization(const Scenario& scn, const Geometry& geom,
                                    std::mt19937_64& rng);

/// Channel vector of device k for deflections F; back lobes clamped to zero.
Eigen::VectorXcd channel_vector(const ChannelRealization& real, int k,
                                const DeflectionMatrix& F);

/// Same but with the raw polynomial (f . qhat)^p, no back-lobe clamp. This is
/// the branch the optimizer's surrogate machinery expands.
Eigen::VectorXcd channel_vector_unclamped(const ChannelRealization& real, int k,
                                          const DeflectionMatrix& F);

std::vector<Eigen::VectorXcd> all_channels(const ChannelRealization& real,
                                           const DeflectionMatrix& F);

/// Derivative of h_{k,n} with respect to the boresight f_n. Zero in the
/// clamped back-lobe region f_n . qhat <= 0.
Eigen::Vector3cd channel_gradient(const ChannelRealization& real, int k, int n,
                                  const Eigen::Vector3d& f_n);

}  // namespace ramec
