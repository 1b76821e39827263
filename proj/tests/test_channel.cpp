#include "doctest.h"

#include "ramec/channel.hpp"
#include "ramec/scenario.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

using namespace ramec;

namespace {

const std::string kGoldenPath = std::string(RAMEC_SOURCE_DIR) + "/tests/golden/channel_seed0.csv";

ChannelRealization seed0_realization(const Scenario& scn) {
  std::mt19937_64 rng(0);
  const auto angles = sample_device_angles(scn, rng);
  const Geometry geom = build_geometry(scn, angles);
  return make_realization(scn, geom, rng);
}

// A deflection with every antenna tilted somewhere inside the cone.
DeflectionMatrix tilted_deflections(int n, double theta_max, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ue(0.0, theta_max * 0.999);
  std::uniform_real_distribution<double> ua(0.0, 2.0 * std::numbers::pi * 0.999);
  DeflectionMatrix F;
  F.f.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) F.f.push_back(pointing_vector(ue(rng), ua(rng)));
  return F;
}

}  // namespace

TEST_CASE("boresight gain normalizes the pattern family") {
  CHECK(boresight_gain(0.0) == doctest::Approx(2.0));
  CHECK(boresight_gain(1.0) == doctest::Approx(6.0));
  CHECK(boresight_gain(2.0) == doctest::Approx(10.0));
  CHECK(boresight_gain(4.0) == doctest::Approx(18.0));
  CHECK(directional_pattern(4.0).g0 == doctest::Approx(18.0));
  CHECK(directional_pattern(4.0).p == doctest::Approx(4.0));
  CHECK(isotropic_pattern().g0 == doctest::Approx(1.0));
  CHECK(isotropic_pattern().p == doctest::Approx(0.0));
}

TEST_CASE("directional gain on and off boresight") {
  CHECK(directional_gain(1.0, 4.0) == doctest::Approx(18.0));
  CHECK(directional_gain(0.5, 4.0) == doctest::Approx(18.0 * std::pow(0.5, 8.0)));
  CHECK(directional_gain(0.0, 4.0) == 0.0);
  CHECK(directional_gain(-0.3, 4.0) == 0.0);  // back lobe is dark
  CHECK(directional_gain(0.7, 0.0, 1.0) == doctest::Approx(1.0));
  CHECK(directional_gain(1.0, 2.0, 5.0) == doctest::Approx(5.0));
}

TEST_CASE("large-scale gain is the reference power law") {
  const double zeta0 = db_to_linear(-30.0);
  CHECK(large_scale_gain(1.0, zeta0, 2.8) == doctest::Approx(zeta0));
  CHECK(large_scale_gain(40.0, zeta0, 2.8) == doctest::Approx(zeta0 * std::pow(40.0, -2.8)));
  CHECK(large_scale_gain(10.0, 1.0, 2.0) == doctest::Approx(0.01));
  CHECK_THROWS_AS(large_scale_gain(0.0, zeta0, 2.8), std::invalid_argument);
  CHECK_THROWS_AS(large_scale_gain(-1.0, zeta0, 2.8), std::invalid_argument);
}

TEST_CASE("deflection matrix validation") {
  DeflectionMatrix F = DeflectionMatrix::boresight(4);
  CHECK(F.size() == 4);
  CHECK_NOTHROW(F.validate(std::numbers::pi / 6.0));
  CHECK_NOTHROW(F.validate(0.0));  // boresight sits exactly on the degenerate cone

  F.f[2] = Eigen::Vector3d(0.9, 0.0, 0.0);  // not unit
  CHECK_THROWS_AS(F.validate(std::numbers::pi / 6.0), std::invalid_argument);

  F = DeflectionMatrix::boresight(4);
  F.f[1] = pointing_vector(0.6, 1.0);  // outside the pi/6 cone
  CHECK_THROWS_AS(F.validate(std::numbers::pi / 6.0), std::invalid_argument);
  CHECK_NOTHROW(F.validate(0.7));
}

TEST_CASE("realization assembles the Rician decomposition") {
  const Scenario scn = default_scenario();
  const ChannelRealization real = seed0_realization(scn);
  REQUIRE(real.devices() == 4);
  REQUIRE(real.antennas() == 9);

  for (int k = 0; k < 4; ++k)
    for (int n = 0; n < 9; ++n) {
      const double d = real.geom.dist[k][n];
      const double ls = large_scale_gain(d, scn.zeta0_linear(), scn.alpha0);
      CHECK(real.large_scale(k, n) == doctest::Approx(ls).epsilon(1e-14));
      CHECK(std::abs(real.los_phase(k, n)) == doctest::Approx(1.0).epsilon(1e-14));
      const double kap = scn.kappa[k];
      CHECK(std::abs(real.beta_tilde(k, n)) ==
            doctest::Approx(std::sqrt(kap / (kap + 1.0) * ls * boresight_gain(scn.p_exponent)))
                .epsilon(1e-12));
      const std::complex<double> expected_nlos =
          std::sqrt(ls / (kap + 1.0)) * real.nlos_draws(k, n);
      CHECK(std::abs(real.nlos_term(k, n) - expected_nlos) ==
            doctest::Approx(0.0).epsilon(1e-15));
    }

  // Channel entries reassemble from the stored pieces.
  std::mt19937_64 rng(11);
  const DeflectionMatrix F = tilted_deflections(9, scn.theta_max_rad, rng);
  for (int k = 0; k < 4; ++k) {
    const Eigen::VectorXcd h = channel_vector(real, k, F);
    for (int n = 0; n < 9; ++n) {
      const double b = std::max(0.0, F.f[n].dot(real.geom.unit_dir[k][n]));
      const std::complex<double> manual =
          real.beta_tilde(k, n) * std::pow(b, scn.p_exponent) + real.nlos_term(k, n);
      CHECK(std::abs(h(n) - manual) == doctest::Approx(0.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("nlos draws are unit-variance circular and reproducible") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXcd d = draw_nlos(200, 50, rng);
  double mean_sq = 0.0;
  std::complex<double> mean = 0.0;
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 0; j < d.cols(); ++j) {
      mean_sq += std::norm(d(i, j));
      mean += d(i, j);
    }
  mean_sq /= static_cast<double>(d.size());
  mean /= static_cast<double>(d.size());
  CHECK(mean_sq == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(mean) == doctest::Approx(0.0).epsilon(0.05));

  std::mt19937_64 rng2(5);
  const Eigen::MatrixXcd d2 = draw_nlos(200, 50, rng2);
  CHECK((d - d2).norm() == 0.0);
}

TEST_CASE("back lobes are clamped to the diffuse floor") {
  const Scenario scn = default_scenario();
  const ChannelRealization real = seed0_realization(scn);

  // Point every antenna away from device 0: the LoS factor dies, only the
  // frozen diffuse term remains. (Bypasses the cone check on purpose; the
  // evaluator itself has no cone knowledge.)
  DeflectionMatrix away;
  away.f.assign(9, Eigen::Vector3d::Zero());
  for (int n = 0; n < 9; ++n) away.f[n] = -real.geom.unit_dir[0][n];
  const Eigen::VectorXcd h = channel_vector(real, 0, away);
  for (int n = 0; n < 9; ++n)
    CHECK(std::abs(h(n) - real.nlos_term(0, n)) == doctest::Approx(0.0).epsilon(1e-15));

  // The unclamped branch keeps the signed polynomial: p = 4 is even, so the
  // mirrored deflection restores the full LoS term.
  const Eigen::VectorXcd hu = channel_vector_unclamped(real, 0, away);
  for (int n = 0; n < 9; ++n) {
    const double b = away.f[n].dot(real.geom.unit_dir[0][n]);
    const std::complex<double> manual =
        real.beta_tilde(0, n) * std::pow(b, 4.0) + real.nlos_term(0, n);
    CHECK(std::abs(hu(n) - manual) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("isotropic pattern makes the channel deflection-invariant") {
  const Scenario scn = default_scenario();
  std::mt19937_64 rng(0);
  const auto angles = sample_device_angles(scn, rng);
  const Geometry geom = build_geometry(scn, angles);
  const Eigen::MatrixXcd draws = draw_nlos(scn.K, scn.n_antennas(), rng);
  const ChannelRealization iso = make_realization(scn, geom, draws, isotropic_pattern());

  const Eigen::VectorXcd ref = channel_vector(iso, 2, DeflectionMatrix::boresight(9));
  std::mt19937_64 frng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const DeflectionMatrix F = tilted_deflections(9, std::numbers::pi / 2.0 * 0.99, frng);
    const Eigen::VectorXcd h = channel_vector(iso, 2, F);
    CHECK((h - ref).norm() == 0.0);  // pow(b, 0) == 1 for every b, clamped or not
  }
}

TEST_CASE("boresight derivative matches finite differences") {
  const Scenario scn = default_scenario();
  const ChannelRealization real = seed0_realization(scn);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);

  const double step = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = trial % 4;
    const int n = trial % 9;
    // Keep the projection safely positive so the clamp is inactive.
    Eigen::Vector3d f;
    do {
      f = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
      if (f.dot(real.geom.unit_dir[k][n]) < 0.0) f = -f;
    } while (f.dot(real.geom.unit_dir[k][n]) < 0.2);

    const Eigen::Vector3cd grad = channel_gradient(real, k, n, f);
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::Vector3d fp = f, fm = f;
      fp(axis) += step;
      fm(axis) -= step;
      const double bp = fp.dot(real.geom.unit_dir[k][n]);
      const double bm = fm.dot(real.geom.unit_dir[k][n]);
      const std::complex<double> hp = real.beta_tilde(k, n) * std::pow(bp, scn.p_exponent);
      const std::complex<double> hm = real.beta_tilde(k, n) * std::pow(bm, scn.p_exponent);
      const std::complex<double> fd = (hp - hm) / (2.0 * step);
      worst = std::max(worst, std::abs(fd - grad(axis)) / std::max(std::abs(grad(axis)), 1e-20));
    }
  }
  CHECK(worst <= 1e-6);

  // Clamped region and flat pattern have zero derivative.
  const Eigen::Vector3d back = -real.geom.unit_dir[1][3];
  CHECK(channel_gradient(real, 1, 3, back).norm() == 0.0);
  const ChannelRealization iso = make_realization(
      scn, real.geom, real.nlos_draws, isotropic_pattern());
  CHECK(channel_gradient(iso, 1, 3, Eigen::Vector3d::UnitX()).norm() == 0.0);
}

TEST_CASE("pure line-of-sight magnitude on axis") {
  // One antenna, one device on the array normal, huge Rician factor: the
  // boresight channel power is the pattern peak times the path loss.
  Scenario scn = default_scenario().with_devices(1);
  scn.Ny = 1;
  scn.Nz = 1;
  scn.kappa = {1e12};
  scn.validate();
  const Geometry geom = build_geometry(scn, {0.0});
  const ChannelRealization real =
      make_realization(scn, geom, Eigen::MatrixXcd::Zero(1, 1), directional_pattern(4.0));
  const Eigen::VectorXcd h = channel_vector(real, 0, DeflectionMatrix::boresight(1));
  const double expect =
      std::sqrt(large_scale_gain(40.0, scn.zeta0_linear(), scn.alpha0) * 18.0);
  CHECK(std::abs(h(0)) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("golden channel regression at seed zero") {
  const Scenario scn = default_scenario();
  const ChannelRealization real = seed0_realization(scn);
  const DeflectionMatrix F = DeflectionMatrix::boresight(scn.n_antennas());

  std::vector<std::vector<std::complex<double>>> fresh(scn.K);
  for (int k = 0; k < scn.K; ++k) {
    const Eigen::VectorXcd h = channel_vector(real, k, F);
    for (int n = 0; n < scn.n_antennas(); ++n) fresh[k].push_back(h(n));
  }

  if (std::getenv("RAMEC_REGEN_GOLDEN") != nullptr) {
    std::ofstream out(kGoldenPath);
    REQUIRE(out.good());
    out << "k,n,re,im\n";
    char buf[128];
    for (int k = 0; k < scn.K; ++k)
      for (int n = 0; n < scn.n_antennas(); ++n) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", k, n, fresh[k][n].real(),
                      fresh[k][n].imag());
        out << buf;
      }
    MESSAGE("regenerated ", kGoldenPath);
    return;
  }

  std::ifstream in(kGoldenPath);
  REQUIRE_MESSAGE(in.good(), "golden file missing; run with RAMEC_REGEN_GOLDEN=1");
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "k,n,re,im");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    const int k = std::stoi(tok);
    std::getline(ss, tok, ',');
    const int n = std::stoi(tok);
    std::getline(ss, tok, ',');
    const double re = std::stod(tok);
    std::getline(ss, tok, ',');
    const double im = std::stod(tok);
    const std::complex<double> want(re, im);
    CHECK(std::abs(fresh[k][n] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    ++rows;
  }
  CHECK(rows == scn.K * scn.n_antennas());
}
