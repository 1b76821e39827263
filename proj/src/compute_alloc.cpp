#include "ramec/compute_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ramec {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBudgetTol = 1e-8;  ///< relative budget residual for mu bisection
constexpr int kMuIters = 200;
constexpr double kOracleTol = 1e-9;  ///< relative width for the latency bisection
}  // namespace

double device_latency(double task_bits, double cycles_per_bit, double local_cps,
                      double rate_bps, double ell, double fe) {
  const double local = (task_bits - ell) * cycles_per_bit / local_cps;
  if (ell <= 0.0) return local;
  if (rate_bps <= 0.0 || fe <= 0.0) return kInf;
  const double offload = ell / rate_bps + ell * cycles_per_bit / fe;
  return std::max(local, offload);
}

double optimal_split(double task_bits, double cycles_per_bit, double local_cps,
                     double rate_bps, double fe) {
  if (rate_bps <= 0.0 || fe <= 0.0) return 0.0;
  const double num = task_bits * cycles_per_bit * rate_bps * fe;
  const double den =
      fe * local_cps + cycles_per_bit * rate_bps * (fe + local_cps);
  return num / den;
}

double equalized_latency(double task_bits, double cycles_per_bit, double local_cps,
                         double rate_bps, double fe) {
  if (rate_bps <= 0.0 || fe <= 0.0) return task_bits * cycles_per_bit / local_cps;
  const double cr = cycles_per_bit * rate_bps;
  return task_bits * cycles_per_bit * (fe + cr) / (fe * (local_cps + cr) + cr * local_cps);
}

LatencyReport evaluate_latency(const Scenario& scn, const std::vector<double>& rates_bps,
                               const Allocation& alloc) {
  const std::size_t K = static_cast<std::size_t>(scn.K);
  if (rates_bps.size() != K || alloc.ell.size() != K || alloc.fe.size() != K)
    throw std::invalid_argument("evaluate_latency: size mismatch");
  LatencyReport rep;
  rep.local_s.resize(K);
  rep.offload_s.resize(K);
  rep.device_s.resize(K);
  rep.rates_bps = rates_bps;
  rep.tau_s = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double L = scn.task_bits[k];
    const double c = scn.cycles_per_bit[k];
    const double fl = scn.local_cps[k];
    const double ell = alloc.ell[k];
    const double fe = alloc.fe[k];
    rep.local_s[k] = (L - ell) * c / fl;
    if (ell <= 0.0)
      rep.offload_s[k] = 0.0;
    else if (rates_bps[k] <= 0.0 || fe <= 0.0)
      rep.offload_s[k] = kInf;
    else
      rep.offload_s[k] = ell / rates_bps[k] + ell * c / fe;
    rep.device_s[k] = std::max(rep.local_s[k], rep.offload_s[k]);
    rep.tau_s = std::max(rep.tau_s, rep.device_s[k]);
  }
  return rep;
}

namespace {

/// Stationarity allocation at a given multiplier, clamped at zero.
double edge_share_at_mu(double L, double c, double fl, double R, double mu) {
  const double cr = c * R;
  const double fe = (std::sqrt(L * c * c * c * R * R / mu) - cr * fl) / (fl + cr);
  return std::max(0.0, fe);
}

}  // namespace

std::pair<Allocation, double> kkt_edge_allocation(const Scenario& scn,
                                                  const std::vector<double>& rates_bps) {
  const std::size_t K = static_cast<std::size_t>(scn.K);
  if (rates_bps.size() != K)
    throw std::invalid_argument("kkt_edge_allocation: rate count mismatch");
  for (double r : rates_bps)
    if (!(r > 0.0)) throw std::invalid_argument("kkt_edge_allocation: rates must be positive");

  const auto budget_sum = [&](double mu) {
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      s += edge_share_at_mu(scn.task_bits[k], scn.cycles_per_bit[k], scn.local_cps[k],
                            rates_bps[k], mu);
    return s;
  };

  // fe_k hits zero at mu = L c / fl^2; start from the smallest such threshold
  // and grow geometrically until the whole clamped sum fits the budget.
  double mu_hi = kInf;
  for (std::size_t k = 0; k < K; ++k)
    mu_hi = std::min(mu_hi, scn.task_bits[k] * scn.cycles_per_bit[k] /
                                (scn.local_cps[k] * scn.local_cps[k]));
  int guard = 0;
  while (budget_sum(mu_hi) > scn.fmax_cps && guard++ < 2000) mu_hi *= 2.0;

  double mu_lo = mu_hi;
  guard = 0;
  while (budget_sum(mu_lo) < scn.fmax_cps && guard++ < 2000) mu_lo *= 0.5;

  double mu = mu_hi;
  for (int it = 0; it < kMuIters; ++it) {
    mu = 0.5 * (mu_lo + mu_hi);
    const double s = budget_sum(mu);
    if (std::abs(s - scn.fmax_cps) <= kBudgetTol * scn.fmax_cps) break;
    if (s > scn.fmax_cps)
      mu_lo = mu;
    else
      mu_hi = mu;
  }

  Allocation alloc;
  alloc.ell.resize(K);
  alloc.fe.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    alloc.fe[k] = edge_share_at_mu(scn.task_bits[k], scn.cycles_per_bit[k],
                                   scn.local_cps[k], rates_bps[k], mu);
    alloc.ell[k] = optimal_split(scn.task_bits[k], scn.cycles_per_bit[k],
                                 scn.local_cps[k], rates_bps[k], alloc.fe[k]);
  }
  return {alloc, mu};
}

double required_edge_share(double task_bits, double cycles_per_bit, double local_cps,
                           double rate_bps, double t) {
  const double lc = task_bits * cycles_per_bit;
  if (t >= lc / local_cps) return 0.0;
  if (rate_bps <= 0.0) return kInf;
  const double cr = cycles_per_bit * rate_bps;
  // fe -> inf latency floor: L c / (fl + c R).
  if (t <= lc / (local_cps + cr)) return kInf;
  return cr * (t * local_cps - lc) / (lc - t * (local_cps + cr));
}

std::pair<Allocation, double> minmax_oracle_allocation(const Scenario& scn,
                                                       const std::vector<double>& rates_bps) {
  const std::size_t K = static_cast<std::size_t>(scn.K);
  if (rates_bps.size() != K)
    throw std::invalid_argument("minmax_oracle_allocation: rate count mismatch");
  for (double r : rates_bps)
    if (!(r > 0.0))
      throw std::invalid_argument("minmax_oracle_allocation: rates must be positive");

  const auto feasible = [&](double t) {
    double need = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double fe = required_edge_share(scn.task_bits[k], scn.cycles_per_bit[k],
                                            scn.local_cps[k], rates_bps[k], t);
      if (std::isinf(fe)) return false;
      need += fe;
      if (need > scn.fmax_cps) return false;
    }
    return true;
  };

  // t_lo: the largest per-device fe -> inf floor (infeasible); t_hi: all-local
  // latency of the slowest device (feasible with zero edge budget).
  double t_lo = 0.0;
  double t_hi = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double lc = scn.task_bits[k] * scn.cycles_per_bit[k];
    const double cr = scn.cycles_per_bit[k] * rates_bps[k];
    t_lo = std::max(t_lo, lc / (scn.local_cps[k] + cr));
    t_hi = std::max(t_hi, lc / scn.local_cps[k]);
  }

  for (int it = 0; it < 200 && (t_hi - t_lo) > kOracleTol * t_hi; ++it) {
    const double mid = 0.5 * (t_lo + t_hi);
    if (feasible(mid))
      t_hi = mid;
    else
      t_lo = mid;
  }

  Allocation alloc;
  alloc.ell.resize(K);
  alloc.fe.resize(K);
  double tau = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    alloc.fe[k] = required_edge_share(scn.task_bits[k], scn.cycles_per_bit[k],
                                      scn.local_cps[k], rates_bps[k], t_hi);
    alloc.ell[k] = optimal_split(scn.task_bits[k], scn.cycles_per_bit[k],
                                 scn.local_cps[k], rates_bps[k], alloc.fe[k]);
    tau = std::max(tau, equalized_latency(scn.task_bits[k], scn.cycles_per_bit[k],
                                          scn.local_cps[k], rates_bps[k], alloc.fe[k]));
  }
  return {alloc, tau};
}

double integerize_split(double ell_frac,
                        const std::function<double(double)>& device_latency_of) {
  const double lo = std::floor(ell_frac);
  const double hi = std::ceil(ell_frac);
  if (lo == hi) return lo;
  return device_latency_of(hi) < device_latency_of(lo) ? hi : lo;
}

}  // namespace ramec
