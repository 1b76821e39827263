#pragma once

#include "ramec/scenario.hpp"

#include <functional>
#include <vector>

namespace ramec {

/**
 * @file compute_alloc.hpp
 * @brief Partial-offloading latency model and min-max edge CPU allocation.
 *
 * Device k splits its task: L - ell bits run locally at fl cycles/s, ell bits
 * are uploaded at rate R and served at fe cycles/s on the edge. Its latency is
 * the max of the local and offload branches; the allocator picks the split and
 * the edge shares so the slowest device finishes as early as possible.
 */

/// Per-device offload decision: split sizes (bits) and edge CPU shares (cyc/s).
struct Allocation {
  std::vector<double> ell;  ///< offloaded bits, 0 <= ell <= L
  std::vector<double> fe;   ///< edge cycles/s, sum <= fmax
};

struct LatencyReport {
  std::vector<double> local_s;    ///< (L - ell) c / fl
  std::vector<double> offload_s;  ///< ell / R + ell c / fe
  std::vector<double> device_s;   ///< max of the two branches
  std::vector<double> rates_bps;  ///< uplink rates the report was built from
  double tau_s;                   ///< max over devices
};

/// Latency of one device for a given split. R <= 0 or fe <= 0 force the
/// offload branch to +inf when ell > 0 (nothing can be offloaded).
double device_latency(double task_bits, double cycles_per_bit, double local_cps,
                      double rate_bps, double ell, double fe);

/// Split equalizing the two branches: ell = L c R fe / (fe fl + c R (fe + fl)).
/// Zero when the device cannot offload (R <= 0 or fe <= 0).
double optimal_split(double task_bits, double cycles_per_bit, double local_cps,
                     double rate_bps, double fe);

/// Device latency at the equalizing split, as a function of the edge share:
/// D(fe) = L c (fe + c R) / (fe (fl + c R) + c R fl). At fe = 0 this is the
/// all-local latency L c / fl.
double equalized_latency(double task_bits, double cycles_per_bit, double local_cps,
                         double rate_bps, double fe);

LatencyReport evaluate_latency(const Scenario& scn, const std::vector<double>& rates_bps,
                               const Allocation& alloc);

/// Water-filling-style edge allocation from the stationarity condition
/// fe = max(0, (sqrt(L c^3 R^2 / mu) - c R fl) / (fl + c R)), with the
/// multiplier mu found by bisection until sum(fe) meets the budget fmax.
/// Returns the allocation (with equalizing splits) and the multiplier.
std::pair<Allocation, double> kkt_edge_allocation(const Scenario& scn,
                                                  const std::vector<double>& rates_bps);

/// Independent reference allocator: bisect the latency target t and test
/// feasibility via the per-device minimum edge share needed to meet t.
/// Returns the allocation and the achieved min-max latency.
std::pair<Allocation, double> minmax_oracle_allocation(const Scenario& scn,
                                                       const std::vector<double>& rates_bps);

/// Smallest edge share under which one device can finish within t seconds
/// (infinity when t is below the fe -> inf latency floor, 0 when local
/// computation alone meets t). Exposed for the oracle's feasibility test.
double required_edge_share(double task_bits, double cycles_per_bit, double local_cps,
                           double rate_bps, double t);

/// Round one device's fractional split to whole bits: whichever of floor and
/// ceil yields the smaller latency under `device_latency_of`, ties to floor.
double integerize_split(double ell_frac,
                        const std::function<double(double)>& device_latency_of);

}  // namespace ramec
