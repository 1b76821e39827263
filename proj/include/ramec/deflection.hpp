#pragma once

#include "ramec/beamforming.hpp"
#include "ramec/channel.hpp"
#include "ramec/compute_alloc.hpp"
#include "ramec/scenario.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace ramec {

/**
 * @file deflection.hpp
 * @brief Boresight optimization for fixed beamformers and compute allocation.
 *
 * The SINR of device k is a ratio of polynomials in the boresight directions.
 * A quadratic transform with per-device auxiliary scalars eta_k removes the
 * fraction; the numerator is linearized to first order and each interference
 * power |w_k^H h_j|^2 is replaced by a quadratic upper bound whose curvature
 * constant dominates its Hessian over the whole feasible range. The resulting
 * per-antenna max-min concave program is solved by projected supergradient
 * ascent, one antenna at a time, and a full sweep is only accepted when the
 * true clamped-channel latency improves.
 */

/// Optimal auxiliary scalars eta_k = sqrt(P_k) w_k^H h_k / (interference +
/// noise) of the quadratic transform, at the given channels.
std::vector<std::complex<double>> update_eta(const std::vector<Eigen::VectorXcd>& channels,
                                             const BeamformerSet& W,
                                             const std::vector<double>& powers_w,
                                             double sigma2_w);

/// Transformed SINR objective 2 Re{conj(eta) sqrt(P_k) w^H h_k}
/// - |eta|^2 (interference + noise). Equals the true SINR at eta = eta_k*.
double quadratic_transform_value(std::complex<double> eta,
                                 const std::vector<Eigen::VectorXcd>& channels,
                                 const BeamformerSet& W, int k,
                                 const std::vector<double>& powers_w, double sigma2_w);

/// One interference power |w_k^H h_j|^2 viewed as a polynomial in the single
/// projection b = f_n . qhat: u(b) = a0 + b1 * b^p + c2 * b^(2p), obtained by
/// splitting the inner product into the antenna-n term and the frozen rest.
struct MajorizerCoeffs {
  double a0;  ///< |dbar|^2
  double b1;  ///< 2 Re(dbar * conj(c))
  double c2;  ///< |c|^2
  double p;
  Eigen::Vector3d qhat;
};

/// Build coefficients from c = conj(w_{k,n}) * beta_tilde_{j,n} and the frozen
/// remainder dbar (other antennas' contributions plus the antenna-n diffuse
/// term).
MajorizerCoeffs make_majorizer(std::complex<double> c, std::complex<double> dbar,
                               double p, const Eigen::Vector3d& qhat);

double interference_poly_value(const MajorizerCoeffs& mc, double b);
Eigen::Vector3d interference_gradient(const MajorizerCoeffs& mc, double b);
/// Scalar kappa(b) with Hessian = kappa(b) * qhat qhat^T.
double interference_curvature(const MajorizerCoeffs& mc, double b);
/// Curvature bound sup_{|b| <= 1} |kappa(b)| = p(p-1)|b1| + 2p(2p-1)c2;
/// guarantees delta * I dominates the Hessian everywhere on the feasible set.
double lipschitz_delta(const MajorizerCoeffs& mc);
/// u(anchor) + grad u(anchor) . (f - anchor) + (delta/2) |f - anchor|^2.
double majorizer_value(const MajorizerCoeffs& mc, const Eigen::Vector3d& f,
                       const Eigen::Vector3d& anchor);

/// First-order model of the beamformed signal w_k^H h_k(F) around an anchor:
/// exact value at the anchor plus per-antenna slopes from the clamped channel
/// derivative.
struct AffineNumerator {
  std::complex<double> value_at_anchor;
  std::vector<Eigen::Vector3cd> slope;  ///< conj(w_{k,n}) * dh_{k,n}/df_n
  std::vector<Eigen::Vector3d> anchor;

  std::complex<double> eval(const DeflectionMatrix& F) const;
};

AffineNumerator linearize_numerator(const ChannelRealization& real,
                                    const DeflectionMatrix& anchor,
                                    const BeamformerSet& W, int k);

/// Euclidean projection onto the convex cap set {|f| <= 1, f . e1 >= cos
/// theta_max}: case analysis over the interior, the sphere face, the plane
/// face, and their intersection circle.
Eigen::Vector3d project_cap(const Eigen::Vector3d& v, double theta_max_rad);

/// True max latency at boresights F for fixed beamformers and allocation.
double latency_for_deflections(const Scenario& scn, const ChannelRealization& real,
                               const DeflectionMatrix& F, const BeamformerSet& W,
                               const Allocation& alloc);

struct DeflectionOutcome {
  DeflectionMatrix F;
  double tau_s;     ///< true latency at the returned boresights
  int outer_iters;  ///< accepted + rejected outer sweeps performed
  bool improved;    ///< false when F_init was returned unchanged
};

/// Alternates eta updates with antenna-by-antenna surrogate sweeps; a sweep is
/// accepted only when the true clamped-channel latency does not worsen and
/// either it drops or the weakest device's true SINR rises, so the latency
/// sequence is non-increasing by construction while rate gains still get
/// through to the next allocation step.
DeflectionOutcome optimize_deflections(const DeflectionMatrix& F_init,
                                       const ChannelRealization& real,
                                       const BeamformerSet& W, const Allocation& alloc,
                                       const Scenario& scn);

}  // namespace ramec
