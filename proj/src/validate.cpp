#include "ramec/validate.hpp"

#include "ramec/beamforming.hpp"
#include "ramec/channel.hpp"
#include "ramec/compute_alloc.hpp"
#include "ramec/deflection.hpp"
#include "ramec/driver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ramec {

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

std::complex<double> random_cn(std::mt19937_64& rng, double stddev = 1.0) {
  std::normal_distribution<double> g(0.0, stddev / std::numbers::sqrt2);
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

Eigen::VectorXcd random_unit(std::mt19937_64& rng, int n) {
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = random_cn(rng);
  return v / v.norm();
}

Eigen::Vector3d random_ball_point(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::Vector3d v(g(rng), g(rng), g(rng));
  const double nrm = v.norm();
  if (nrm == 0.0) return Eigen::Vector3d::UnitX();
  return v / nrm * std::cbrt(u(rng));
}

std::string fmt_residual_note(double worst, const char* what) {
  std::ostringstream os;
  os << "worst " << what << " = " << worst;
  return os.str();
}

}  // namespace

CheckResult check_power_conservation(double p, double g0_override) {
  const double g0 = g0_override < 0.0 ? boresight_gain(p) : g0_override;
  // Simpson quadrature of the solid-angle integral, azimuth integrated
  // analytically: I = 2 pi * int_0^pi G(eps) sin(eps) d eps.
  const int n = 1 << 20;  // even
  const double h = std::numbers::pi / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double eps = i * h;
    const double f = directional_gain(std::cos(eps), p, g0) * std::sin(eps);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * f;
  }
  const double integral = 2.0 * std::numbers::pi * sum * h / 3.0;
  const double target = 4.0 * std::numbers::pi;
  const double residual = std::abs(integral - target) / target;
  CheckResult res;
  res.name = "power_conservation_p" + std::to_string(static_cast<int>(p));
  res.residual = residual;
  res.pass = residual <= 0.01;
  res.note = fmt_residual_note(residual, "relative integral error");
  return res;
}

CheckResult check_channel_gradient_fd(const Scenario& scn, std::mt19937_64& rng) {
  const int N = scn.n_antennas();
  TrialContext ctx = make_trial(scn, rng());
  const ChannelRealization real =
      make_realization(scn, ctx.geom, ctx.nlos, directional_pattern(scn.p_exponent));

  std::uniform_int_distribution<int> pick_k(0, scn.K - 1);
  std::uniform_int_distribution<int> pick_n(0, N - 1);
  std::normal_distribution<double> g(0.0, 1.0);
  const double step = 1e-6;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int k = pick_k(rng);
    const int n = pick_n(rng);
    const Eigen::Vector3d& q =
        real.geom.unit_dir[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
    // Stay safely on the smooth side of the back-lobe clamp.
    Eigen::Vector3d f = (q + 0.3 * Eigen::Vector3d(g(rng), g(rng), g(rng))).normalized();
    if (f.dot(q) < 0.2) {
      --t;
      continue;
    }
    const Eigen::Vector3cd grad = channel_gradient(real, k, n, f);
    Eigen::Vector3cd fd;
    for (int axis = 0; axis < 3; ++axis) {
      DeflectionMatrix Fp = DeflectionMatrix::boresight(N);
      DeflectionMatrix Fm = DeflectionMatrix::boresight(N);
      Eigen::Vector3d fp = f, fm = f;
      fp(axis) += step;
      fm(axis) -= step;
      Fp.f[static_cast<std::size_t>(n)] = fp;
      Fm.f[static_cast<std::size_t>(n)] = fm;
      fd(axis) = (channel_vector(real, k, Fp)(n) - channel_vector(real, k, Fm)(n)) /
                 (2.0 * step);
    }
    const double rel = (fd - grad).norm() / std::max(grad.norm(), 1e-30);
    worst = std::max(worst, rel);
  }
  CheckResult res;
  res.name = "channel_gradient_fd";
  res.residual = worst;
  res.pass = worst <= 1e-6;
  res.note = fmt_residual_note(worst, "relative gradient error");
  return res;
}

namespace {

MajorizerCoeffs random_coeffs(std::mt19937_64& rng, double p) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Vector3d q(g(rng), g(rng), g(rng));
  q.normalize();
  return make_majorizer(random_cn(rng), random_cn(rng), p, q);
}

}  // namespace

CheckResult check_interference_fd(std::mt19937_64& rng) {
  const double p = 4.0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const MajorizerCoeffs mc = random_coeffs(rng, p);
    const double b = 0.7;
    const auto u = [&](double x) { return interference_poly_value(mc, x); };

    // First derivative: 3-point central at the classic step.
    const double h1 = 1e-5;
    const double fd1 = (u(b + h1) - u(b - h1)) / (2.0 * h1);
    const double an1 = interference_gradient(mc, b).dot(mc.qhat);
    // Errors are measured against the term-magnitude scale: the true value
    // can vanish by cancellation, which no finite difference can resolve.
    const double scale1 =
        p * std::pow(b, p - 1.0) * (std::abs(mc.b1) + 2.0 * mc.c2 * std::pow(b, p));
    worst = std::max(worst, std::abs(fd1 - an1) / std::max(scale1, 1e-30));

    // Second derivative: 5-point stencil at a larger step; the 3-point form
    // at 1e-5 loses ~11 digits to cancellation and cannot certify 1e-6.
    const double h2 = 3e-3;
    const double fd2 = (-u(b + 2.0 * h2) + 16.0 * u(b + h2) - 30.0 * u(b) +
                        16.0 * u(b - h2) - u(b - 2.0 * h2)) /
                       (12.0 * h2 * h2);
    const double an2 = interference_curvature(mc, b);
    const double scale2 = p * (p - 1.0) * std::abs(mc.b1) * std::pow(b, p - 2.0) +
                          2.0 * p * (2.0 * p - 1.0) * mc.c2 * std::pow(b, 2.0 * p - 2.0);
    worst = std::max(worst, std::abs(fd2 - an2) / std::max(scale2, 1e-30));
  }
  CheckResult res;
  res.name = "interference_fd";
  res.residual = worst;
  res.pass = worst <= 1e-6;
  res.note = fmt_residual_note(worst, "relative derivative error");
  return res;
}

CheckResult check_delta_dominance(std::mt19937_64& rng, double delta_scale) {
  const double p = 4.0;
  double worst = 0.0;  // positive = violation
  std::uniform_real_distribution<double> ub(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const MajorizerCoeffs mc = random_coeffs(rng, p);
    const double delta = lipschitz_delta(mc) * delta_scale;
    for (int i = 0; i <= 1000; ++i) {
      const double b = -1.0 + 2.0 * i / 1000.0;
      worst = std::max(worst, std::abs(interference_curvature(mc, b)) - delta);
    }
    for (int i = 0; i < 100; ++i) {
      const double b = ub(rng);
      worst = std::max(worst, std::abs(interference_curvature(mc, b)) - delta);
    }
  }
  CheckResult res;
  res.name = "delta_dominance";
  res.residual = worst;
  res.pass = worst <= 1e-12;
  res.note = fmt_residual_note(worst, "curvature excess over bound");
  return res;
}

CheckResult check_majorizer_validity(std::mt19937_64& rng, double delta_scale) {
  const double p = 4.0;
  double worst = 0.0;  // positive = polynomial exceeds its upper bound
  for (int t = 0; t < 1000; ++t) {
    const MajorizerCoeffs mc = random_coeffs(rng, p);
    const Eigen::Vector3d f = random_ball_point(rng);
    const Eigen::Vector3d anchor = random_ball_point(rng);
    const double b_anchor = anchor.dot(mc.qhat);
    const Eigen::Vector3d diff = f - anchor;
    const double bound = interference_poly_value(mc, b_anchor) +
                         interference_gradient(mc, b_anchor).dot(diff) +
                         0.5 * lipschitz_delta(mc) * delta_scale * diff.squaredNorm();
    const double truth = interference_poly_value(mc, f.dot(mc.qhat));
    worst = std::max(worst, truth - bound);
  }
  CheckResult res;
  res.name = "majorizer_validity";
  res.residual = worst;
  res.pass = worst <= 1e-12;
  res.note = fmt_residual_note(worst, "bound violation");
  return res;
}

CheckResult check_tightness(const Scenario& scn, std::mt19937_64& rng) {
  const int N = scn.n_antennas();
  const std::vector<double> powers = scn.powers_w();
  const double sigma2 = scn.noise_w();
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<Eigen::VectorXcd> channels(static_cast<std::size_t>(scn.K));
    const double scale = log_uniform(rng, 1e-6, 1e-2);
    for (auto& h : channels) {
      h.resize(N);
      for (int i = 0; i < N; ++i) h(i) = random_cn(rng, scale);
    }
    BeamformerSet W;
    W.w.resize(static_cast<std::size_t>(scn.K));
    for (auto& w : W.w) w = random_unit(rng, N);
    const auto eta = update_eta(channels, W, powers, sigma2);
    for (int k = 0; k < scn.K; ++k) {
      const double gamma = sinr(W.w[static_cast<std::size_t>(k)], channels, k, powers, sigma2);
      const double f =
          quadratic_transform_value(eta[static_cast<std::size_t>(k)], channels, W, k, powers, sigma2);
      worst = std::max(worst, std::abs(f - gamma) / std::max(gamma, 1e-300));
    }
  }
  CheckResult res;
  res.name = "quadratic_transform_tightness";
  res.residual = worst;
  res.pass = worst <= 1e-10;
  res.note = fmt_residual_note(worst, "relative identity error");
  return res;
}

namespace {

/// Largest SINR the eigenvalue test accepts for one device, by bisection.
double max_feasible_gamma(const CovarianceSet& cov, int k, const std::vector<double>& powers,
                          double sigma2, double gamma_hint) {
  std::vector<double> req(cov.size(), 0.0);
  const auto feasible = [&](double gamma) {
    req.assign(cov.size(), 0.0);
    req[static_cast<std::size_t>(k)] = gamma;
    return sdr_feasibility(req, cov, powers, sigma2)
               .device_feasible[static_cast<std::size_t>(k)] != 0;
  };
  double hi = std::max(gamma_hint * 1.5, 1.0);
  int guard = 0;
  while (feasible(hi) && guard++ < 60) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace

CheckResult check_sdr_mmse_equivalence(const Scenario& scn, std::mt19937_64& rng) {
  const std::vector<double> powers = scn.powers_w();
  const double sigma2 = scn.noise_w();
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    TrialContext ctx = make_trial(scn, rng());
    const ChannelRealization real =
        make_realization(scn, ctx.geom, ctx.nlos, directional_pattern(scn.p_exponent));
    const auto channels = all_channels(real, DeflectionMatrix::boresight(scn.n_antennas()));
    const CovarianceSet cov = make_covariances(channels);
    for (int k = 0; k < scn.K; ++k) {
      const double gamma_mmse = mmse_beamformer(channels, k, powers, sigma2).second;
      const double gamma_eig = max_feasible_gamma(cov, k, powers, sigma2, gamma_mmse);
      worst = std::max(worst, std::abs(gamma_eig - gamma_mmse) / gamma_mmse);
    }
  }
  CheckResult res;
  res.name = "sdr_mmse_equivalence";
  res.residual = worst;
  res.pass = worst <= 1e-8;
  res.note = fmt_residual_note(worst, "relative SINR gap");
  return res;
}

CheckResult check_bisection_vs_mmse(const Scenario& scn, std::mt19937_64& rng) {
  const std::vector<double> powers = scn.powers_w();
  const double sigma2 = scn.noise_w();
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    TrialContext ctx = make_trial(scn, rng());
    const ChannelRealization real =
        make_realization(scn, ctx.geom, ctx.nlos, directional_pattern(scn.p_exponent));
    const auto channels = all_channels(real, DeflectionMatrix::boresight(scn.n_antennas()));

    std::vector<double> rates(static_cast<std::size_t>(scn.K));
    for (int k = 0; k < scn.K; ++k) {
      const double gamma = mmse_beamformer(channels, k, powers, sigma2).second;
      rates[static_cast<std::size_t>(k)] = scn.bandwidth_hz * std::log2(1.0 + gamma);
    }
    const Allocation alloc = kkt_edge_allocation(scn, rates).first;
    const double tau_mmse = evaluate_latency(scn, rates, alloc).tau_s;
    const BeamformingOutcome out = bisection_beamforming(scn, channels, alloc);
    const double tau_bis = evaluate_latency(scn, out.rates_bps, alloc).tau_s;
    worst = std::max(worst, std::abs(tau_bis - tau_mmse) / tau_mmse);
  }
  CheckResult res;
  res.name = "bisection_vs_mmse_latency";
  res.residual = worst;
  res.pass = worst <= 1e-6;
  res.note = fmt_residual_note(worst, "relative latency gap");
  return res;
}

CheckResult check_equal_latency(std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const double L = log_uniform(rng, 1e4, 1e8);
    const double c = log_uniform(rng, 1e2, 1e4);
    const double fl = log_uniform(rng, 1e7, 1e10);
    const double R = log_uniform(rng, 1e4, 1e8);
    const double fe = log_uniform(rng, 1e6, 1e11);
    const double ell = optimal_split(L, c, fl, R, fe);
    const double dl = (L - ell) * c / fl;
    const double de = ell / R + ell * c / fe;
    worst = std::max(worst, std::abs(dl - de) / dl);
  }
  CheckResult res;
  res.name = "equal_latency_split";
  res.residual = worst;
  res.pass = worst <= 1e-9;
  res.note = fmt_residual_note(worst, "relative branch mismatch");
  return res;
}

namespace {

std::vector<double> random_rates(const Scenario& scn, std::mt19937_64& rng) {
  std::vector<double> rates(static_cast<std::size_t>(scn.K));
  for (auto& r : rates) r = log_uniform(rng, 1e5, 1e8);
  return rates;
}

}  // namespace

CheckResult check_kkt_stationarity(const Scenario& scn, std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto rates = random_rates(scn, rng);
    const auto [alloc, mu] = kkt_edge_allocation(scn, rates);
    double sum = 0.0;
    for (double fe : alloc.fe) sum += fe;
    worst = std::max(worst, std::abs(sum - scn.fmax_cps) / scn.fmax_cps);
    for (int k = 0; k < scn.K; ++k) {
      const std::size_t ks = static_cast<std::size_t>(k);
      if (alloc.fe[ks] <= 0.0) continue;
      const double L = scn.task_bits[ks];
      const double c = scn.cycles_per_bit[ks];
      const double fl = scn.local_cps[ks];
      const double cr = c * rates[ks];
      const double den = alloc.fe[ks] * (fl + cr) + cr * fl;
      const double marginal = L * c * c * c * rates[ks] * rates[ks] / (den * den);
      worst = std::max(worst, std::abs(marginal - mu) / mu);
    }
  }
  CheckResult res;
  res.name = "kkt_stationarity";
  res.residual = worst;
  res.pass = worst <= 1e-6;
  res.note = fmt_residual_note(worst, "relative stationarity/budget error");
  return res;
}

CheckResult check_oracle_ordering(const Scenario& scn, std::mt19937_64& rng) {
  double worst = -1.0;  // most positive tau_oracle - tau_kkt (violation if > tol)
  double max_gap = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto rates = random_rates(scn, rng);
    const auto [alloc_kkt, mu] = kkt_edge_allocation(scn, rates);
    const double tau_kkt = evaluate_latency(scn, rates, alloc_kkt).tau_s;
    const auto [alloc_o, tau_oracle] = minmax_oracle_allocation(scn, rates);
    worst = std::max(worst, tau_oracle - tau_kkt);
    max_gap = std::max(max_gap, (tau_kkt - tau_oracle) / tau_oracle);
  }
  CheckResult res;
  res.name = "oracle_vs_kkt_ordering";
  res.residual = worst;
  res.pass = worst <= 1e-9;
  std::ostringstream os;
  os << "largest relative kkt excess over oracle = " << max_gap;
  res.note = os.str();
  return res;
}

CheckResult check_oracle_equalization(const Scenario& scn, std::mt19937_64& rng) {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto rates = random_rates(scn, rng);
    const auto [alloc, tau] = minmax_oracle_allocation(scn, rates);
    const LatencyReport rep = evaluate_latency(scn, rates, alloc);
    for (int k = 0; k < scn.K; ++k)
      if (alloc.fe[static_cast<std::size_t>(k)] > 0.0)
        worst = std::max(
            worst, std::abs(rep.device_s[static_cast<std::size_t>(k)] - tau) / tau);
  }
  CheckResult res;
  res.name = "oracle_latency_equalization";
  res.residual = worst;
  res.pass = worst <= 1e-6;
  res.note = fmt_residual_note(worst, "relative latency spread");
  return res;
}

CheckResult check_projection(std::mt19937_64& rng) {
  const double theta_max = 0.5235987755982988;
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Eigen::Vector3d v = 3.0 * Eigen::Vector3d(g(rng), g(rng), g(rng));
    const Eigen::Vector3d z = project_cap(v, theta_max);
    if (z.norm() > 1.0 + 1e-12 || z.x() < std::cos(theta_max) - 1e-12) {
      worst = std::max(worst, 1.0);
      continue;
    }
    const double dz = (v - z).norm();
    const double c0 = std::cos(theta_max);
    for (int i = 0; i < 500; ++i) {
      // A point of {||f|| <= 1, f.x >= cos(theta_max)}: pick the axial
      // coordinate in [c0, 1], then a point of the disk that the ball
      // leaves at that height.
      const double x = c0 + (1.0 - c0) * u(rng);
      const double rad = std::sqrt(std::max(0.0, 1.0 - x * x)) * std::sqrt(u(rng));
      const double phi = 2.0 * std::numbers::pi * u(rng);
      const Eigen::Vector3d y(x, rad * std::sin(phi), rad * std::cos(phi));
      worst = std::max(worst, dz - (v - y).norm());
    }
  }
  CheckResult res;
  res.name = "cap_projection_optimality";
  res.residual = worst;
  res.pass = worst <= 1e-9;
  res.note = fmt_residual_note(worst, "distance excess over sampled points");
  return res;
}

CheckResult check_single_link(const Scenario& base) {
  Scenario scn = base.with_devices(1);
  scn.Ny = 1;
  scn.Nz = 1;
  scn.kappa = {1e12};
  scn.validate();

  const Geometry geom = build_geometry(scn, {0.0});
  Eigen::MatrixXcd draws = Eigen::MatrixXcd::Zero(1, 1);
  const ChannelRealization real =
      make_realization(scn, geom, draws, directional_pattern(scn.p_exponent));
  const AoResult res = run_ao(scn, real);

  // Hand-derived reference: on-axis boresight, matched filter, all edge
  // cycles to the single device, split balancing the two branches.
  const double ls = scn.zeta0_linear() * std::pow(scn.radius_m, -scn.alpha0);
  const double kap = 1e12;
  const double gain2 = (kap / (kap + 1.0)) * ls * boresight_gain(scn.p_exponent);
  const double gamma = scn.power_w(0) * gain2 / scn.noise_w();
  const double rate = scn.bandwidth_hz * std::log2(1.0 + gamma);
  const double tau_ref = equalized_latency(scn.task_bits[0], scn.cycles_per_bit[0],
                                           scn.local_cps[0], rate, scn.fmax_cps);

  const double rel = std::abs(res.record.tau_s - tau_ref) / tau_ref;
  CheckResult out;
  out.name = "single_link_analytic";
  out.residual = rel;
  out.pass = rel <= 1e-4;
  out.note = fmt_residual_note(rel, "relative latency error");
  return out;
}

CheckResult check_ao_monotonic(const Scenario& scn, int seeds) {
  double worst = 0.0;
  bool all_converged = true;
  for (int s = 0; s < seeds; ++s) {
    TrialContext ctx = make_trial(scn, scn.base_seed + static_cast<std::uint64_t>(s));
    const ChannelRealization real =
        make_realization(scn, ctx.geom, ctx.nlos, directional_pattern(scn.p_exponent));
    const AoResult res = run_ao(scn, real);
    all_converged = all_converged && res.record.converged;
    for (std::size_t i = 1; i < res.trace.size(); ++i)
      worst = std::max(worst, (res.trace[i] - res.trace[i - 1]) / res.trace[i - 1]);
  }
  CheckResult res;
  res.name = "ao_trace_monotonic";
  res.residual = worst;
  res.pass = worst <= 1e-9 && all_converged;
  res.note = all_converged ? fmt_residual_note(worst, "relative trace increase")
                           : "non-convergent run encountered";
  return res;
}

std::vector<CheckResult> run_validation(const Scenario& scn) {
  std::mt19937_64 rng(scn.base_seed + 0x9e3779b97f4a7c15ull);
  std::vector<CheckResult> out;
  for (double p : {0.0, 1.0, 2.0, 4.0}) out.push_back(check_power_conservation(p));
  out.push_back(check_channel_gradient_fd(scn, rng));
  out.push_back(check_interference_fd(rng));
  out.push_back(check_delta_dominance(rng));
  out.push_back(check_majorizer_validity(rng));
  out.push_back(check_tightness(scn, rng));
  out.push_back(check_sdr_mmse_equivalence(scn, rng));
  out.push_back(check_bisection_vs_mmse(scn, rng));
  out.push_back(check_equal_latency(rng));
  out.push_back(check_kkt_stationarity(scn, rng));
  out.push_back(check_oracle_ordering(scn, rng));
  out.push_back(check_oracle_equalization(scn, rng));
  out.push_back(check_projection(rng));
  out.push_back(check_single_link(scn));
  out.push_back(check_ao_monotonic(scn, 5));
  return out;
}

}  // namespace ramec
