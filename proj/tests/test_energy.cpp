#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "bisense/channel.hpp"
#include "bisense/energy.hpp"
#include "bisense/errors.hpp"
#include "bisense/geometry.hpp"
#include "bisense/numerology.hpp"
#include "bisense/rng.hpp"

using namespace bisense;

namespace {

// Log-density of N(mu, sigma^2) up to the shared constant, for checking the
// equal-likelihood property of fitted thresholds.
double log_density(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma);
}

EnergyDetector fit(std::vector<double> e, std::vector<int> y) {
  return fit_energy_threshold(e, y);
}

}  // namespace

TEST_CASE("energy statistic is total grid power in dB re 1 W") {
  SymbolGrid g(1, 1);
  g(0, 0) = {1.0, 0.0};
  CHECK(energy_statistic(g) == doctest::Approx(0.0));

  SymbolGrid g4(2, 2, {0.0, 1.0});  // four unit-power entries
  CHECK(energy_statistic(g4) == doctest::Approx(10.0 * std::log10(4.0)));

  // Scaling amplitudes by sqrt(10) lifts the statistic by exactly 10 dB.
  SymbolGrid scaled = g4;
  for (int k = 0; k < 2; ++k) {
    for (int n = 0; n < 2; ++n) scaled(k, n) *= std::sqrt(10.0);
  }
  CHECK(energy_statistic(scaled) ==
        doctest::Approx(energy_statistic(g4) + 10.0).epsilon(1e-12));

  SymbolGrid zero(3, 3);
  CHECK_THROWS_AS(energy_statistic(zero), DomainError);
}

TEST_CASE("equal-spread classes put the threshold at the midpoint") {
  const EnergyDetector det =
      fit({-102.0, -98.0, -92.0, -88.0}, {0, 0, 1, 1});
  CHECK(det.mu0 == doctest::Approx(-100.0));
  CHECK(det.sigma0 == doctest::Approx(2.0));
  CHECK(det.mu1 == doctest::Approx(-90.0));
  CHECK(det.sigma1 == doctest::Approx(2.0));
  CHECK(det.threshold_dbw == doctest::Approx(-95.0).epsilon(1e-12));
}

TEST_CASE("unequal spreads move the threshold to the likelihood crossover") {
  // H0: mean -100, sigma 2.  H1: mean -90, sigma 4.
  const EnergyDetector det =
      fit({-102.0, -98.0, -94.0, -86.0}, {0, 0, 1, 1});
  CHECK(det.sigma0 == doctest::Approx(2.0));
  CHECK(det.sigma1 == doctest::Approx(4.0));
  const double eta = det.threshold_dbw;
  CHECK(eta > det.mu0);
  CHECK(eta < det.mu1);
  // Equal likelihood at the threshold.
  CHECK(log_density(eta, det.mu0, det.sigma0) ==
        doctest::Approx(log_density(eta, det.mu1, det.sigma1)).epsilon(1e-9));
  // The wider H1 spread pulls the crossover below the midpoint.
  CHECK(eta < -95.0);
}

TEST_CASE("the fitted threshold is symmetric under label exchange") {
  const std::vector<double> e = {-102.0, -98.0, -94.0, -86.0};
  const EnergyDetector a = fit(e, {0, 0, 1, 1});
  const EnergyDetector b = fit(e, {1, 1, 0, 0});
  CHECK(a.threshold_dbw == doctest::Approx(b.threshold_dbw).epsilon(1e-9));
  CHECK(a.mu0 == b.mu1);
  CHECK(a.sigma0 == b.sigma1);
}

TEST_CASE("shifting every energy shifts the threshold with it") {
  const std::vector<double> e = {-102.0, -98.0, -94.0, -86.0};
  const std::vector<int> y = {0, 0, 1, 1};
  const EnergyDetector base = fit(e, y);
  std::vector<double> shifted = e;
  for (double& v : shifted) v += 7.5;
  const EnergyDetector moved = fit(shifted, y);
  CHECK(moved.threshold_dbw ==
        doctest::Approx(base.threshold_dbw + 7.5).epsilon(1e-9));
  // Decisions on correspondingly shifted inputs agree.
  for (double v : {-101.0, -96.0, -91.0, -87.0}) {
    CHECK(classify_energy(base, v).decision ==
          classify_energy(moved, v + 7.5).decision);
  }
}

TEST_CASE("classification follows the fitted densities, ties to H1") {
  const EnergyDetector det =
      fit({-102.0, -98.0, -92.0, -88.0}, {0, 0, 1, 1});
  CHECK(classify_energy(det, det.mu0).decision == 0);
  CHECK(classify_energy(det, det.mu1).decision == 1);
  // Exactly at the equal-spread threshold both densities match; the tie
  // resolves toward target-present.
  CHECK(classify_energy(det, det.threshold_dbw).decision == 1);
  CHECK(classify_energy(det, det.threshold_dbw).prob_h1 ==
        doctest::Approx(0.5));
  CHECK(classify_energy(det, det.mu1).prob_h1 > 0.5);
  CHECK(classify_energy(det, det.mu0).prob_h1 < 0.5);
  CHECK_THROWS_AS(
      classify_energy(det, std::numeric_limits<double>::infinity()),
      DomainError);
}

TEST_CASE("the fit rejects degenerate inputs") {
  // Length mismatch.
  const std::vector<double> e = {-100.0, -90.0};
  const std::vector<int> y = {0};
  CHECK_THROWS_AS(fit_energy_threshold(e, y), ShapeError);
  // Fewer than two samples in a class.
  CHECK_THROWS_AS(fit({-100.0, -99.0, -90.0}, {0, 0, 1}), DomainError);
  // One class entirely absent.
  CHECK_THROWS_AS(fit({-100.0, -99.0, -98.0}, {0, 0, 0}), DomainError);
  // Zero spread.
  CHECK_THROWS_AS(fit({-100.0, -100.0, -92.0, -88.0}, {0, 0, 1, 1}),
                  DomainError);
}

TEST_CASE("closed-form accuracy matches the Gaussian error integral") {
  const EnergyDetector det =
      fit({-102.0, -98.0, -92.0, -88.0}, {0, 0, 1, 1});
  // Symmetric equal-sigma case: accuracy = 1 - Q(gap / 2 sigma).
  const double q = 0.5 * std::erfc(2.5 / std::numbers::sqrt2);
  CHECK(closed_form_accuracy(det) == doctest::Approx(1.0 - q).epsilon(1e-12));
}

TEST_CASE("closed-form accuracy predicts the empirical rate on Gaussians") {
  EnergyDetector det;
  det.mu0 = -100.0;
  det.sigma0 = 2.0;
  det.mu1 = -93.0;
  det.sigma1 = 2.0;
  det.threshold_dbw = -96.5;

  SplitMix64 rng(2024);
  int correct = 0;
  const int per_class = 4000;
  for (int i = 0; i < per_class; ++i) {
    const double e0 = det.mu0 + det.sigma0 * rng.gaussian();
    const double e1 = det.mu1 + det.sigma1 * rng.gaussian();
    correct += classify_energy(det, e0).decision == 0;
    correct += classify_energy(det, e1).decision == 1;
  }
  const double empirical = static_cast<double>(correct) / (2 * per_class);
  CHECK(std::abs(empirical - closed_form_accuracy(det)) < 0.02);
}

TEST_CASE("detector JSON round-trips exactly and checks its schema") {
  EnergyDetector det;
  det.mu0 = -101.25;
  det.sigma0 = 1.75;
  det.mu1 = -88.5;
  det.sigma1 = 3.25;
  det.threshold_dbw = -95.0625;

  const EnergyDetector back =
      EnergyDetector::from_json_text(det.to_json_text());
  CHECK(back.mu0 == det.mu0);
  CHECK(back.sigma0 == det.sigma0);
  CHECK(back.mu1 == det.mu1);
  CHECK(back.sigma1 == det.sigma1);
  CHECK(back.threshold_dbw == det.threshold_dbw);

  CHECK_THROWS_AS(EnergyDetector::from_json_text("{]"), CorruptDataError);
  CHECK_THROWS_AS(EnergyDetector::from_json_text("{}"), VersionError);
  CHECK_THROWS_AS(EnergyDetector::from_json_text(
                      "{\"schema_version\": 2, \"mu0_dbw\": -100}"),
                  VersionError);
  CHECK_THROWS_AS(EnergyDetector::from_json_text(
                      "{\"schema_version\": 1, \"mu0_dbw\": -100}"),
                  CorruptDataError);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "bisense_energy_test";
  fs::create_directories(dir);
  const std::string file = (dir / "det.json").string();
  det.save(file);
  const EnergyDetector loaded = EnergyDetector::load(file);
  CHECK(loaded.threshold_dbw == det.threshold_dbw);
  CHECK_THROWS_AS(EnergyDetector::load((dir / "missing.json").string()),
                  IoError);
  fs::remove_all(dir);
}

TEST_CASE("a strong target adds energy over its paired empty scene") {
  // Same clutter, same noise stream; the only difference is a large-RCS
  // target.  Noiseless synthesis makes the comparison exact per draw.  The
  // RCS is far above anything physical so the target's own power term
  // dominates even a worst-case destructive cross term with the direct path.
  const WaveformConfig cfg = WaveformConfig::desk_profile();
  const DerivedParams dp = derive_params(cfg);
  const SymbolGrid s = generate_sensing_grid(cfg, 11);

  ScenarioSpec h1;
  h1.seed = 321;
  h1.target_rcs_m2 = 1e4;
  ScenarioSpec h0 = h1;
  h0.hypothesis = Hypothesis::h0;

  int wins = 0;
  const int trials = 20;
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t rec = 5000 + i;
    const Deployment d1 = sample_deployment(h1, rec);
    const Deployment d0 = sample_deployment(h0, rec);
    SplitMix64 rng(0);  // unused: noiseless
    const SymbolGrid r1 =
        synthesize_rx_grid(s, enumerate_paths(d1, cfg.center_freq_hz),
                           cfg.subcarrier_spacing_hz, dp.sensing_spacing_s,
                           NoiseSpec{}, rng);
    const SymbolGrid r0 =
        synthesize_rx_grid(s, enumerate_paths(d0, cfg.center_freq_hz),
                           cfg.subcarrier_spacing_hz, dp.sensing_spacing_s,
                           NoiseSpec{}, rng);
    wins += energy_statistic(r1) > energy_statistic(r0);
  }
  CHECK(wins == trials);
}
