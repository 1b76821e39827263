#include "ramec/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ramec {

double boresight_gain(double p) { return 2.0 * (2.0 * p + 1.0); }

RadiationPattern directional_pattern(double p) { return {boresight_gain(p), p}; }

RadiationPattern isotropic_pattern() { return {1.0, 0.0}; }

double directional_gain(double cos_eps, double p) {
  return directional_gain(cos_eps, p, boresight_gain(p));
}

double directional_gain(double cos_eps, double p, double g0) {
  if (cos_eps <= 0.0) return 0.0;
  return g0 * std::pow(cos_eps, 2.0 * p);
}

double large_scale_gain(double d, double zeta0_linear, double alpha0) {
  if (d <= 0.0) throw std::invalid_argument("large_scale_gain: distance must be positive");
  return zeta0_linear * std::pow(d, -alpha0);
}

DeflectionMatrix DeflectionMatrix::boresight(int n) {
  DeflectionMatrix F;
  F.f.assign(static_cast<std::size_t>(n), Eigen::Vector3d::UnitX());
  return F;
}

void DeflectionMatrix::validate(double theta_max_rad) const {
  const double cos_cap = std::cos(theta_max_rad);
  for (std::size_t n = 0; n < f.size(); ++n) {
    const double norm = f[n].norm();
    if (std::abs(norm - 1.0) > 1e-9)
      throw std::invalid_argument("DeflectionMatrix: vector " + std::to_string(n) +
                                  " is not unit length");
    if (f[n].x() < cos_cap - 1e-9)
      throw std::invalid_argument("DeflectionMatrix: vector " + std::to_string(n) +
                                  " exceeds the zenith cone");
  }
}

Eigen::MatrixXcd draw_nlos(int k, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd draws(k, n);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < n; ++j) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      draws(i, j) = std::complex<double>(re * inv_sqrt2, im * inv_sqrt2);
    }
  return draws;
}

ChannelRealization make_realization(const Scenario& scn, const Geometry& geom,
                                    const Eigen::MatrixXcd& nlos_draws,
                                    const RadiationPattern& pattern) {
  const int K = scn.K;
  const int N = scn.n_antennas();
  if (nlos_draws.rows() != K || nlos_draws.cols() != N)
    throw std::invalid_argument("make_realization: draws must be K x N");

  ChannelRealization real;
  real.geom = geom;
  real.pattern = pattern;
  real.kappa = scn.kappa;
  real.nlos_draws = nlos_draws;
  real.large_scale.resize(K, N);
  real.los_phase.resize(K, N);
  real.beta_tilde.resize(K, N);
  real.nlos_term.resize(K, N);

  const double zeta0 = scn.zeta0_linear();
  const std::complex<double> j(0.0, 1.0);
  for (int k = 0; k < K; ++k) {
    const double kap = scn.kappa[static_cast<std::size_t>(k)];
    const double los_weight = std::sqrt(kap / (kap + 1.0));
    const double nlos_weight = std::sqrt(1.0 / (kap + 1.0));
    for (int n = 0; n < N; ++n) {
      const double d = geom.dist[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
      const double ls = large_scale_gain(d, zeta0, scn.alpha0);
      real.large_scale(k, n) = ls;
      real.los_phase(k, n) = std::exp(-j * (2.0 * std::numbers::pi * d / scn.wavelength_m));
      real.beta_tilde(k, n) =
          los_weight * std::sqrt(ls * pattern.g0) * real.los_phase(k, n);
      real.nlos_term(k, n) = nlos_weight * std::sqrt(ls) * nlos_draws(k, n);
    }
  }
  return real;
}

ChannelRealization make_realization(const Scenario& scn, const Geometry& geom,
                                    std::mt19937_64& rng) {
  return make_realization(scn, geom, draw_nlos(scn.K, scn.n_antennas(), rng),
                          directional_pattern(scn.p_exponent));
}

namespace {

Eigen::VectorXcd channel_impl(const ChannelRealization& real, int k,
                              const DeflectionMatrix& F, bool clamp) {
  const int N = real.antennas();
  if (F.size() != N) throw std::invalid_argument("channel_vector: deflection count mismatch");
  Eigen::VectorXcd h(N);
  const double p = real.pattern.p;
  for (int n = 0; n < N; ++n) {
    double b = F.f[static_cast<std::size_t>(n)].dot(
        real.geom.unit_dir[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)]);
    if (clamp && b < 0.0) b = 0.0;
    h(n) = real.beta_tilde(k, n) * std::pow(b, p) + real.nlos_term(k, n);
  }
  return h;
}

}  // namespace

Eigen::VectorXcd channel_vector(const ChannelRealization& real, int k,
                                const DeflectionMatrix& F) {
  return channel_impl(real, k, F, true);
}

Eigen::VectorXcd channel_vector_unclamped(const ChannelRealization& real, int k,
                                          const DeflectionMatrix& F) {
  return channel_impl(real, k, F, false);
}

std::vector<Eigen::VectorXcd> all_channels(const ChannelRealization& real,
                                           const DeflectionMatrix& F) {
  std::vector<Eigen::VectorXcd> h;
  h.reserve(static_cast<std::size_t>(real.devices()));
  for (int k = 0; k < real.devices(); ++k) h.push_back(channel_vector(real, k, F));
  return h;
}

Eigen::Vector3cd channel_gradient(const ChannelRealization& real, int k, int n,
                                  const Eigen::Vector3d& f_n) {
  const Eigen::Vector3d& q =
      real.geom.unit_dir[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
  const double p = real.pattern.p;
  const double b = f_n.dot(q);
  if (b <= 0.0 || p == 0.0) return Eigen::Vector3cd::Zero();
  const std::complex<double> scale = real.beta_tilde(k, n) * p * std::pow(b, p - 1.0);
  return scale * q.cast<std::complex<double>>();
}

}  // namespace ramec
