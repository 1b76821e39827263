#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace ramec {

/**
 * @file scenario.hpp
 * @brief System configuration, array/device geometry and seeded randomness.
 */

double db_to_linear(double db);
double dbm_to_watts(double dbm);

/// Full system configuration. Immutable after construction; per-device
/// parameters are K-sized vectors (the config file broadcasts scalars).
struct Scenario {
  int K = 4;             ///< number of devices
  int Ny = 3;            ///< antennas along y
  int Nz = 3;            ///< antennas along z
  double wavelength_m = 0.125;
  double spacing_m = 0.0625;
  double p_exponent = 4.0;
  double theta_max_rad = 0.5235987755982988;  // pi/6
  double zeta0_db = -30.0;
  double alpha0 = 2.8;
  std::vector<double> kappa{1.0, 1.0, 1.0, 1.0};  ///< Rician factor per device
  double bandwidth_hz = 2e6;
  double noise_dbm = -60.0;
  std::vector<double> power_dbm{3.0, 3.0, 3.0, 3.0};
  std::vector<double> task_bits{1e6, 1e6, 1e6, 1e6};           ///< L_k
  std::vector<double> cycles_per_bit{1e3, 1e3, 1e3, 1e3};      ///< c_k
  std::vector<double> local_cps{6e8, 6e8, 6e8, 6e8};           ///< f_k^l
  double fmax_cps = 30e9;
  double radius_m = 40.0;
  std::uint64_t base_seed = 0;

  int n_antennas() const { return Ny * Nz; }
  double zeta0_linear() const { return db_to_linear(zeta0_db); }
  double noise_w() const { return dbm_to_watts(noise_dbm); }
  double power_w(int k) const { return dbm_to_watts(power_dbm.at(k)); }
  std::vector<double> powers_w() const;

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;

  /// Copy with K changed; per-device vectors broadcast from their first entry.
  Scenario with_devices(int k) const;
  Scenario with_power_dbm(double p) const;
  Scenario with_fmax(double f) const;
};

/// Stock configuration (2.4 GHz, N=9, K=4).
Scenario default_scenario();

/// Loads a key=value config file. Unknown keys are an error; missing keys
/// keep the defaults. Scalar per-device keys broadcast to all K devices.
Scenario load_scenario(const std::string& path);

/// Antenna/device placement and the derived per-link direction data.
struct Geometry {
  std::vector<Eigen::Vector3d> antenna_pos;          ///< N, on the y-z plane
  std::vector<Eigen::Vector3d> device_pos;           ///< K
  std::vector<std::vector<Eigen::Vector3d>> unit_dir;///< [k][n] device direction
  std::vector<std::vector<double>> dist;             ///< [k][n] meters
};

/// Places the Ny x Nz grid centered at the origin and devices on the
/// radius-r arc in the x-y half plane x >= 0 at the given angles.
Geometry build_geometry(const Scenario& scn, const std::vector<double>& device_angles);

/// K i.i.d. angles uniform on [-pi/2, pi/2].
std::vector<double> sample_device_angles(const Scenario& scn, std::mt19937_64& rng);

/// Boresight unit vector for zenith theta_e (from +x) and azimuth theta_a
/// (from +z within the y-z plane).
Eigen::Vector3d pointing_vector(double theta_e, double theta_a);

}  // namespace ramec
