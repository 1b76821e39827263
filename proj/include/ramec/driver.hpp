#pragma once

#include "ramec/beamforming.hpp"
#include "ramec/channel.hpp"
#include "ramec/compute_alloc.hpp"
#include "ramec/deflection.hpp"
#include "ramec/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ramec {

/**
 * @file driver.hpp
 * @brief Alternating-optimization orchestration, benchmark schemes,
 *        Monte-Carlo sweeps, and CSV emission.
 *
 * One trial = one seed: the generator first draws the device placement, then
 * the fading, and is then handed to the schemes in a fixed order so paired
 * comparisons reuse identical randomness. Every optimizer block is wrapped in
 * an accept-only-if-better guard on one consistent latency metric, which
 * makes each trial's latency trace literally non-increasing.
 */

enum class Scheme { ra, fixed, isotropic, random };

const std::vector<Scheme>& all_schemes();
std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

struct RunRecord {
  std::string scheme;
  std::string param_name;  ///< swept scenario field, "none" for single runs
  double param_value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double tau_s = 0.0;
  int iter_count = 0;  ///< alternating-optimization iterations executed
  double wall_ms = 0.0;
  bool converged = true;
  std::vector<double> device_s;   ///< D_k
  std::vector<double> rates_bps;  ///< R_k
  std::vector<double> ell;        ///< integer offloaded bits
  std::vector<double> fe;         ///< edge cycles/s
};

struct AoResult {
  RunRecord record;           ///< metadata fields filled by the caller
  std::vector<double> trace;  ///< latency per iteration, starting at init
  DeflectionMatrix F;
  BeamformerSet W;
};

/// Full alternating optimization from boresight initialization: beamforming,
/// boresight deflections, compute allocation, looped to the relative
/// latency-change stop rule, with the final split rounded to whole bits.
AoResult run_ao(const Scenario& scn, const ChannelRealization& real);

/// Shared-randomness bundle for one (seed, scenario) trial. The generator is
/// left positioned after the placement and fading draws so scheme-specific
/// randomness (the random-orientation benchmark) continues the same stream.
struct TrialContext {
  std::vector<double> device_angles;
  Geometry geom;
  Eigen::MatrixXcd nlos;
  std::mt19937_64 rng;
};

TrialContext make_trial(const Scenario& scn, std::uint64_t seed);

/// Run one scheme on a trial. `ra` runs the full loop; `fixed` pins all
/// boresights to the array normal; `isotropic` rebuilds the realization with
/// a flat unit-gain pattern (same fading draws); `random` freezes boresights
/// drawn uniformly in angle from the trial stream. Benchmarks skip only the
/// deflection block.
RunRecord run_scheme(const Scenario& scn, Scheme scheme, TrialContext& ctx);

struct SweepSpec {
  std::string param;  ///< power_dbm | fmax_cps | K
  std::vector<double> values;
  int trials = 50;
  std::vector<Scheme> schemes = all_schemes();
};

/// Apply one swept value to a base scenario (power_dbm, fmax_cps, or K).
Scenario apply_param(const Scenario& base, const std::string& param, double value);

/// All (value, trial, scheme) runs, paired by seed = base_seed + trial.
std::vector<RunRecord> run_sweep(const Scenario& base, const SweepSpec& spec);

struct AggregateRow {
  std::string scheme;
  std::string param_name;
  double param_value;
  std::string stat;  ///< "mean" or "stderr"
  double tau_s;
};

/// Mean and standard error of tau per (scheme, param_value), in scheme-major
/// order following the sweep's value order.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& records);

/// Tidy CSV: one row per record, aggregate rows appended, fixed column order,
/// doubles at full precision. Device columns are padded to the widest record.
void write_csv(const std::string& path, const std::vector<RunRecord>& records,
               const std::vector<AggregateRow>& aggregates);

}  // namespace ramec
