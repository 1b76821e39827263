#pragma once

#include "ramec/scenario.hpp"

#include <random>
#include <string>
#include <vector>

namespace ramec {

/**
 * @file validate.hpp
 * @brief Oracle-backed self-checks: every analytic shortcut in the library is
 *        re-derived here by an independent route (quadrature, finite
 *        differences, bisection against closed forms, random search) and
 *        compared at pinned tolerances.
 */

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;  ///< worst relative (or absolute, see note) deviation
  std::string note;
};

/// Spherical power integral of the radiation pattern vs 4*pi (1% tolerance).
/// `g0_override` < 0 means the power-conserving default 2(2p+1).
CheckResult check_power_conservation(double p, double g0_override = -1.0);

/// Boresight derivative of the channel entries vs central finite differences.
CheckResult check_channel_gradient_fd(const Scenario& scn, std::mt19937_64& rng);

/// Interference-polynomial gradient and curvature vs finite differences.
CheckResult check_interference_fd(std::mt19937_64& rng);

/// Curvature bound dominates the Hessian scalar over a dense projection grid.
/// `delta_scale` deliberately corrupts the bound for mutation testing.
CheckResult check_delta_dominance(std::mt19937_64& rng, double delta_scale = 1.0);

/// Quadratic upper bound never dips below the polynomial on random pairs.
CheckResult check_majorizer_validity(std::mt19937_64& rng, double delta_scale = 1.0);

/// Quadratic-transform value at the optimal auxiliary scalar equals the SINR.
CheckResult check_tightness(const Scenario& scn, std::mt19937_64& rng);

/// Largest SINR passing the eigenvalue feasibility test equals the MMSE
/// maximum, per device, on random instances.
CheckResult check_sdr_mmse_equivalence(const Scenario& scn, std::mt19937_64& rng);

/// Latency found by the slack bisection equals the latency implied by the
/// per-device MMSE optima.
CheckResult check_bisection_vs_mmse(const Scenario& scn, std::mt19937_64& rng);

/// The closed-form split equalizes the local and offload branches.
CheckResult check_equal_latency(std::mt19937_64& rng);

/// Multiplier allocation: budget met and marginal latencies equalized.
CheckResult check_kkt_stationarity(const Scenario& scn, std::mt19937_64& rng);

/// Exact min-max reference never exceeds the multiplier allocation's latency.
CheckResult check_oracle_ordering(const Scenario& scn, std::mt19937_64& rng);

/// At the exact optimum, devices holding edge cycles finish simultaneously.
CheckResult check_oracle_equalization(const Scenario& scn, std::mt19937_64& rng);

/// Cap-set projection beats every sampled feasible point.
CheckResult check_projection(std::mt19937_64& rng);

/// Single-device, single-antenna, line-of-sight pipeline vs hand arithmetic.
CheckResult check_single_link(const Scenario& base);

/// Latency traces non-increasing and convergent across seeds.
CheckResult check_ao_monotonic(const Scenario& scn, int seeds);

/// Everything above at default knobs, seeded from the scenario.
std::vector<CheckResult> run_validation(const Scenario& scn);

}  // namespace ramec
