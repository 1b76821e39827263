#include "ramec/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ramec {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

std::vector<double> Scenario::powers_w() const {
  std::vector<double> p(power_dbm.size());
  std::transform(power_dbm.begin(), power_dbm.end(), p.begin(), dbm_to_watts);
  return p;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("scenario: " + what);
}

void require_device_vector(const std::vector<double>& v, int k, const std::string& name) {
  require(static_cast<int>(v.size()) == k, name + " must have K entries");
  for (double x : v) require(std::isfinite(x) && x > 0.0, name + " entries must be positive");
}

std::vector<double> broadcast(const std::vector<double>& v, int k) {
  if (v.empty()) throw std::invalid_argument("scenario: empty per-device vector");
  std::vector<double> out(static_cast<std::size_t>(k), v.front());
  for (std::size_t i = 0; i < out.size() && i < v.size(); ++i) out[i] = v[i];
  return out;
}

}  // namespace

void Scenario::validate() const {
  require(K >= 1, "K must be >= 1");
  require(Ny >= 1 && Nz >= 1, "Ny*Nz must be >= 1");
  require(wavelength_m > 0.0, "wavelength_m must be positive");
  require(spacing_m > 0.0, "spacing_m must be positive");
  require(p_exponent >= 0.0, "p_exponent must be >= 0");
  require(theta_max_rad >= 0.0 && theta_max_rad < std::numbers::pi / 2.0,
          "theta_max_rad must lie in [0, pi/2)");
  require(std::isfinite(zeta0_db) && zeta0_linear() > 0.0, "zeta0 must convert to a positive gain");
  require(std::isfinite(alpha0), "alpha0 must be finite");
  require(bandwidth_hz > 0.0, "bandwidth_hz must be positive");
  require(std::isfinite(noise_dbm) && noise_w() > 0.0, "noise power must be positive");
  require(fmax_cps > 0.0, "fmax_cps must be positive");
  require(radius_m > 0.0, "radius_m must be positive");
  require_device_vector(kappa, K, "kappa");
  require_device_vector(task_bits, K, "task_bits");
  require_device_vector(cycles_per_bit, K, "cycles_per_bit");
  require_device_vector(local_cps, K, "local_cps");
  require(static_cast<int>(power_dbm.size()) == K, "power_dbm must have K entries");
  for (double p : power_dbm)
    require(std::isfinite(p) && dbm_to_watts(p) > 0.0, "power must convert to positive watts");
}

Scenario Scenario::with_devices(int k) const {
  Scenario s = *this;
  s.K = k;
  s.kappa = broadcast({kappa.front()}, k);
  s.power_dbm = broadcast({power_dbm.front()}, k);
  s.task_bits = broadcast({task_bits.front()}, k);
  s.cycles_per_bit = broadcast({cycles_per_bit.front()}, k);
  s.local_cps = broadcast({local_cps.front()}, k);
  s.validate();
  return s;
}

Scenario Scenario::with_power_dbm(double p) const {
  Scenario s = *this;
  std::fill(s.power_dbm.begin(), s.power_dbm.end(), p);
  s.validate();
  return s;
}

Scenario Scenario::with_fmax(double f) const {
  Scenario s = *this;
  s.fmax_cps = f;
  s.validate();
  return s;
}

Scenario default_scenario() {
  Scenario s;
  s.validate();
  return s;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for '" + key + "': " + value);
  }
  if (pos != value.size())
    throw std::invalid_argument("config: trailing characters in value for '" + key + "'");
  return x;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);

  Scenario s = default_scenario();
  // Per-device values read as scalars, broadcast after K is known.
  double kappa_v = s.kappa.front(), power_v = s.power_dbm.front();
  double bits_v = s.task_bits.front(), cpb_v = s.cycles_per_bit.front();
  double local_v = s.local_cps.front();

  const std::set<std::string> known = {
      "K", "Ny", "Nz", "wavelength_m", "spacing_m", "p_exponent", "theta_max_rad",
      "zeta0_db", "alpha0", "kappa", "bandwidth_hz", "noise_dbm", "power_dbm",
      "task_bits", "cycles_per_bit", "local_cps", "fmax_cps", "radius_m", "base_seed"};

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!known.count(key))
      throw std::invalid_argument("config: unknown key '" + key + "' (line " +
                                  std::to_string(lineno) + ")");
    double x = parse_double(key, value);
    if (key == "K") s.K = static_cast<int>(x);
    else if (key == "Ny") s.Ny = static_cast<int>(x);
    else if (key == "Nz") s.Nz = static_cast<int>(x);
    else if (key == "wavelength_m") s.wavelength_m = x;
    else if (key == "spacing_m") s.spacing_m = x;
    else if (key == "p_exponent") s.p_exponent = x;
    else if (key == "theta_max_rad") s.theta_max_rad = x;
    else if (key == "zeta0_db") s.zeta0_db = x;
    else if (key == "alpha0") s.alpha0 = x;
    else if (key == "kappa") kappa_v = x;
    else if (key == "bandwidth_hz") s.bandwidth_hz = x;
    else if (key == "noise_dbm") s.noise_dbm = x;
    else if (key == "power_dbm") power_v = x;
    else if (key == "task_bits") bits_v = x;
    else if (key == "cycles_per_bit") cpb_v = x;
    else if (key == "local_cps") local_v = x;
    else if (key == "fmax_cps") s.fmax_cps = x;
    else if (key == "radius_m") s.radius_m = x;
    else if (key == "base_seed") s.base_seed = static_cast<std::uint64_t>(x);
  }

  if (s.K < 1) throw std::invalid_argument("config: K must be >= 1");
  s.kappa.assign(s.K, kappa_v);
  s.power_dbm.assign(s.K, power_v);
  s.task_bits.assign(s.K, bits_v);
  s.cycles_per_bit.assign(s.K, cpb_v);
  s.local_cps.assign(s.K, local_v);
  s.validate();
  return s;
}

Geometry build_geometry(const Scenario& scn, const std::vector<double>& device_angles) {
  scn.validate();
  if (static_cast<int>(device_angles.size()) != scn.K)
    throw std::invalid_argument("build_geometry: need K device angles");
  for (double a : device_angles)
    if (a < -std::numbers::pi / 2.0 || a > std::numbers::pi / 2.0)
      throw std::invalid_argument("build_geometry: device angle outside [-pi/2, pi/2]");

  Geometry g;
  const int n = scn.n_antennas();
  g.antenna_pos.reserve(n);
  const double cy = (scn.Ny - 1) / 2.0;
  const double cz = (scn.Nz - 1) / 2.0;
  for (int iy = 0; iy < scn.Ny; ++iy)
    for (int iz = 0; iz < scn.Nz; ++iz)
      g.antenna_pos.emplace_back(0.0, (iy - cy) * scn.spacing_m, (iz - cz) * scn.spacing_m);

  g.device_pos.reserve(scn.K);
  for (double a : device_angles)
    g.device_pos.emplace_back(scn.radius_m * std::cos(a), scn.radius_m * std::sin(a), 0.0);

  g.unit_dir.assign(scn.K, std::vector<Eigen::Vector3d>(n));
  g.dist.assign(scn.K, std::vector<double>(n));
  for (int k = 0; k < scn.K; ++k) {
    for (int i = 0; i < n; ++i) {
      Eigen::Vector3d delta = g.device_pos[k] - g.antenna_pos[i];
      double d = delta.norm();
      if (d <= 0.0) throw std::invalid_argument("build_geometry: device coincides with antenna");
      g.dist[k][i] = d;
      g.unit_dir[k][i] = delta / d;
    }
  }
  return g;
}

std::vector<double> sample_device_angles(const Scenario& scn, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
  std::vector<double> a(static_cast<std::size_t>(scn.K));
  for (double& x : a) x = u(rng);
  return a;
}

Eigen::Vector3d pointing_vector(double theta_e, double theta_a) {
  if (theta_e < 0.0 || theta_e >= std::numbers::pi / 2.0)
    throw std::invalid_argument("pointing_vector: zenith must lie in [0, pi/2)");
  if (theta_a < 0.0 || theta_a >= 2.0 * std::numbers::pi)
    throw std::invalid_argument("pointing_vector: azimuth must lie in [0, 2pi)");
  return {std::cos(theta_e), std::sin(theta_e) * std::sin(theta_a),
          std::sin(theta_e) * std::cos(theta_a)};
}

}  // namespace ramec
