#include "ramec/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace ramec {

namespace {
constexpr double kAoEps = 1e-3;  ///< relative latency change that stops the loop
constexpr int kAoMaxIters = 50;
}  // namespace

const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> order = {Scheme::ra, Scheme::fixed, Scheme::isotropic,
                                            Scheme::random};
  return order;
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::ra: return "ra";
    case Scheme::fixed: return "fixed";
    case Scheme::isotropic: return "isotropic";
    case Scheme::random: return "random";
  }
  throw std::logic_error("scheme_name: unreachable");
}

Scheme scheme_from_name(const std::string& name) {
  for (Scheme s : all_schemes())
    if (scheme_name(s) == name) return s;
  throw std::invalid_argument("unknown scheme: " + name);
}

namespace {

std::vector<double> achieved_rates(const Scenario& scn,
                                   const std::vector<Eigen::VectorXcd>& channels,
                                   const BeamformerSet& W) {
  const std::vector<double> powers = scn.powers_w();
  const double sigma2 = scn.noise_w();
  std::vector<double> rates(static_cast<std::size_t>(scn.K));
  for (int k = 0; k < scn.K; ++k)
    rates[static_cast<std::size_t>(k)] =
        scn.bandwidth_hz *
        std::log2(1.0 + sinr(W.w[static_cast<std::size_t>(k)], channels, k, powers, sigma2));
  return rates;
}

/// The alternating loop shared by the full scheme and the benchmarks; the
/// benchmarks simply skip the boresight block.
AoResult run_ao_core(const Scenario& scn, const ChannelRealization& real,
                     const DeflectionMatrix& F_init, bool tune_boresights) {
  const std::vector<double> powers = scn.powers_w();
  const double sigma2 = scn.noise_w();
  const std::size_t K = static_cast<std::size_t>(scn.K);

  AoResult res;
  res.F = F_init;

  auto channels = all_channels(real, res.F);
  res.W.w.resize(K);
  for (int k = 0; k < scn.K; ++k)
    res.W.w[static_cast<std::size_t>(k)] =
        mmse_beamformer(channels, k, powers, sigma2).first;
  std::vector<double> rates = achieved_rates(scn, channels, res.W);
  Allocation alloc = kkt_edge_allocation(scn, rates).first;
  double tau = evaluate_latency(scn, rates, alloc).tau_s;

  res.trace = {tau};
  res.record.converged = false;
  int iters = 0;

  for (int i = 0; i < kAoMaxIters; ++i) {
    ++iters;

    // Beamformers for the current boresights and allocation.
    const BeamformingOutcome bf = bisection_beamforming(scn, channels, alloc);
    const double tau_bf = evaluate_latency(scn, bf.rates_bps, alloc).tau_s;
    if (tau_bf <= tau) {
      res.W = bf.w;
      rates = bf.rates_bps;
      tau = tau_bf;
    }

    // Boresights for the current beamformers and allocation.
    if (tune_boresights) {
      const DeflectionOutcome d = optimize_deflections(res.F, real, res.W, alloc, scn);
      if (d.improved) {
        res.F = d.F;
        channels = all_channels(real, res.F);
        rates = achieved_rates(scn, channels, res.W);
        tau = d.tau_s;
      }
    }

    // Edge cycles and splits for the current rates.
    const Allocation alloc_new = kkt_edge_allocation(scn, rates).first;
    const double tau_alloc = evaluate_latency(scn, rates, alloc_new).tau_s;
    if (tau_alloc <= tau) {
      alloc = alloc_new;
      tau = tau_alloc;
    }

    const double prev = res.trace.back();
    res.trace.push_back(tau);
    if (std::abs(prev - tau) <= kAoEps * prev) {
      res.record.converged = true;
      break;
    }
  }

  // Final rounding of the splits to whole bits, one device at a time.
  Allocation final_alloc = alloc;
  for (std::size_t k = 0; k < K; ++k) {
    const double L = scn.task_bits[k];
    const double c = scn.cycles_per_bit[k];
    const double fl = scn.local_cps[k];
    const double R = rates[k];
    const double fe = alloc.fe[k];
    final_alloc.ell[k] = integerize_split(
        alloc.ell[k], [&](double l) { return device_latency(L, c, fl, R, l, fe); });
  }

  const LatencyReport rep = evaluate_latency(scn, rates, final_alloc);
  res.record.tau_s = rep.tau_s;
  res.record.iter_count = iters;
  res.record.device_s = rep.device_s;
  res.record.rates_bps = rates;
  res.record.ell = final_alloc.ell;
  res.record.fe = final_alloc.fe;
  return res;
}

}  // namespace

AoResult run_ao(const Scenario& scn, const ChannelRealization& real) {
  return run_ao_core(scn, real, DeflectionMatrix::boresight(scn.n_antennas()), true);
}

TrialContext make_trial(const Scenario& scn, std::uint64_t seed) {
  TrialContext ctx;
  ctx.rng.seed(seed);
  ctx.device_angles = sample_device_angles(scn, ctx.rng);
  ctx.geom = build_geometry(scn, ctx.device_angles);
  ctx.nlos = draw_nlos(scn.K, scn.n_antennas(), ctx.rng);
  return ctx;
}

RunRecord run_scheme(const Scenario& scn, Scheme scheme, TrialContext& ctx) {
  const int N = scn.n_antennas();
  const auto t0 = std::chrono::steady_clock::now();

  AoResult res;
  switch (scheme) {
    case Scheme::ra: {
      const ChannelRealization real =
          make_realization(scn, ctx.geom, ctx.nlos, directional_pattern(scn.p_exponent));
      res = run_ao_core(scn, real, DeflectionMatrix::boresight(N), true);
      break;
    }
    case Scheme::fixed: {
      const ChannelRealization real =
          make_realization(scn, ctx.geom, ctx.nlos, directional_pattern(scn.p_exponent));
      res = run_ao_core(scn, real, DeflectionMatrix::boresight(N), false);
      break;
    }
    case Scheme::isotropic: {
      const ChannelRealization real =
          make_realization(scn, ctx.geom, ctx.nlos, isotropic_pattern());
      res = run_ao_core(scn, real, DeflectionMatrix::boresight(N), false);
      break;
    }
    case Scheme::random: {
      const ChannelRealization real =
          make_realization(scn, ctx.geom, ctx.nlos, directional_pattern(scn.p_exponent));
      // Frozen random orientations: zenith uniform in angle, then azimuth.
      std::uniform_real_distribution<double> zen(0.0, scn.theta_max_rad);
      std::uniform_real_distribution<double> azi(0.0, 2.0 * std::numbers::pi);
      DeflectionMatrix F;
      F.f.resize(static_cast<std::size_t>(N));
      for (int n = 0; n < N; ++n) {
        const double te = zen(ctx.rng);
        const double ta = azi(ctx.rng);
        F.f[static_cast<std::size_t>(n)] = pointing_vector(te, ta);
      }
      res = run_ao_core(scn, real, F, false);
      break;
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  res.record.scheme = scheme_name(scheme);
  res.record.param_name = "none";
  res.record.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return res.record;
}

Scenario apply_param(const Scenario& base, const std::string& param, double value) {
  if (param == "power_dbm" || param == "power") return base.with_power_dbm(value);
  if (param == "fmax_cps" || param == "fmax") return base.with_fmax(value);
  if (param == "K" || param == "devices")
    return base.with_devices(static_cast<int>(std::llround(value)));
  throw std::invalid_argument("apply_param: unknown parameter '" + param + "'");
}

namespace {

std::string canonical_param(const std::string& param) {
  if (param == "power" || param == "power_dbm") return "power_dbm";
  if (param == "fmax" || param == "fmax_cps") return "fmax_cps";
  if (param == "devices" || param == "K") return "K";
  throw std::invalid_argument("unknown sweep parameter '" + param + "'");
}

}  // namespace

std::vector<RunRecord> run_sweep(const Scenario& base, const SweepSpec& spec) {
  if (spec.values.empty()) throw std::invalid_argument("run_sweep: empty value list");
  if (spec.trials < 1) throw std::invalid_argument("run_sweep: trials must be >= 1");
  const std::string pname = canonical_param(spec.param);

  std::vector<RunRecord> records;
  records.reserve(spec.values.size() * static_cast<std::size_t>(spec.trials) *
                  spec.schemes.size());
  for (double value : spec.values) {
    const Scenario scn = apply_param(base, pname, value);
    scn.validate();
    for (int trial = 0; trial < spec.trials; ++trial) {
      const std::uint64_t seed = base.base_seed + static_cast<std::uint64_t>(trial);
      TrialContext ctx = make_trial(scn, seed);
      for (Scheme scheme : spec.schemes) {
        RunRecord rec = run_scheme(scn, scheme, ctx);
        rec.param_name = pname;
        rec.param_value = value;
        rec.trial = trial;
        rec.seed = seed;
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records) {
  std::vector<std::string> schemes;
  std::vector<double> values;
  for (const RunRecord& r : records) {
    if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end())
      schemes.push_back(r.scheme);
    if (std::find(values.begin(), values.end(), r.param_value) == values.end())
      values.push_back(r.param_value);
  }

  std::vector<AggregateRow> rows;
  for (const std::string& scheme : schemes) {
    for (double value : values) {
      std::vector<double> taus;
      std::string pname;
      for (const RunRecord& r : records)
        if (r.scheme == scheme && r.param_value == value) {
          taus.push_back(r.tau_s);
          pname = r.param_name;
        }
      if (taus.empty()) continue;
      const double n = static_cast<double>(taus.size());
      double mean = 0.0;
      for (double t : taus) mean += t;
      mean /= n;
      double var = 0.0;
      for (double t : taus) var += (t - mean) * (t - mean);
      const double se = taus.size() > 1 ? std::sqrt(var / (n - 1.0)) / std::sqrt(n) : 0.0;
      rows.push_back({scheme, pname, value, "mean", mean});
      rows.push_back({scheme, pname, value, "stderr", se});
    }
  }
  return rows;
}

namespace {

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<RunRecord>& records,
               const std::vector<AggregateRow>& aggregates) {
  std::size_t kmax = 0;
  for (const RunRecord& r : records) kmax = std::max(kmax, r.device_s.size());

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "'");

  out << "scheme,param_name,param_value,trial,seed,tau_s,iter_count,wall_ms";
  const char* blocks[] = {"D", "R", "ell", "fe"};
  for (const char* b : blocks)
    for (std::size_t k = 1; k <= kmax; ++k) out << ',' << b << '_' << k;
  out << '\n';

  const auto device_block = [&](const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < kmax; ++k) {
      s += ',';
      if (k < v.size()) s += fmt_g(v[k]);
    }
    return s;
  };

  for (const RunRecord& r : records) {
    out << r.scheme << ',' << r.param_name << ',' << fmt_g(r.param_value) << ',' << r.trial
        << ',' << r.seed << ',' << fmt_g(r.tau_s) << ',' << r.iter_count << ','
        << fmt_g(r.wall_ms) << device_block(r.device_s) << device_block(r.rates_bps)
        << device_block(r.ell) << device_block(r.fe) << '\n';
  }
  for (const AggregateRow& a : aggregates) {
    out << a.scheme << ',' << a.param_name << ',' << fmt_g(a.param_value) << ',' << a.stat
        << ",," << fmt_g(a.tau_s) << ",,";
    for (std::size_t k = 0; k < 4 * kmax; ++k) out << ',';
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

}  // namespace ramec
