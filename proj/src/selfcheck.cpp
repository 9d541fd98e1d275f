#include "bisense/selfcheck.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "bisense/cnn.hpp"
#include "bisense/energy.hpp"
#include "bisense/features.hpp"
#include "bisense/numerology.hpp"
#include "bisense/rng.hpp"

namespace bisense {

namespace {

using cd = std::complex<double>;

cd unit_phasor(double turns) {
  return std::polar(1.0, 2.0 * std::numbers::pi * turns);
}

}  // namespace

RMat reference_ddp(const CMat& g) {
  const int m = g.rows();
  const int n = g.cols();
  RMat out(m, n);
  for (int p = 0; p < m; ++p) {
    for (int c = 0; c < n; ++c) {
      const int q = (c - n / 2 + n) % n;  // undo the centered Doppler axis
      cd acc{};
      for (int k = 0; k < m; ++k) {
        for (int t = 0; t < n; ++t) {
          acc += g(k, t) *
                 unit_phasor(-static_cast<double>(q) * t / n) *
                 unit_phasor(static_cast<double>(p) * k / m);
        }
      }
      acc /= static_cast<double>(m);
      out(p, c) = std::norm(acc);
    }
  }
  return out;
}

std::vector<double> reference_pdp(const CMat& g) {
  const int m = g.rows();
  const int n = g.cols();
  std::vector<double> out(m, 0.0);
  for (int p = 0; p < m; ++p) {
    double total = 0.0;
    for (int t = 0; t < n; ++t) {
      cd acc{};
      for (int k = 0; k < m; ++k) {
        acc += g(k, t) * unit_phasor(static_cast<double>(p) * k / m);
      }
      acc /= static_cast<double>(m);
      total += std::norm(acc);
    }
    out[p] = total / n;
  }
  return out;
}

namespace {

CMat random_grid(int m, int n, std::uint64_t seed) {
  CMat g(m, n);
  SplitMix64 rng = derive_stream(seed, Stream::kSelfTest);
  for (int k = 0; k < m; ++k) {
    for (int t = 0; t < n; ++t) {
      g(k, t) = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    }
  }
  return g;
}

SymbolGrid ones_grid(int m, int n) {
  SymbolGrid s(m, n);
  for (int k = 0; k < m; ++k) {
    for (int t = 0; t < n; ++t) s(k, t) = {1.0, 0.0};
  }
  return s;
}

double rel_frobenius_error(const RMat& a, const RMat& b) {
  double num = 0.0, den = 0.0;
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) {
      const double d = a(r, c) - b(r, c);
      num += d * d;
      den += b(r, c) * b(r, c);
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

CheckResult check_ddp_against_bruteforce() {
  const int sizes[][2] = {{4, 4}, {8, 5}, {7, 8}, {12, 12}, {16, 9}, {5, 16}};
  double worst = 0.0;
  for (const auto& sz : sizes) {
    const int m = sz[0], n = sz[1];
    const CMat g = random_grid(m, n, 1000 + m * 31 + n);
    const DelayDopplerProfile fast = compute_ddp(g, ones_grid(m, n), 1e6, 1e-4);
    worst = std::max(worst, rel_frobenius_error(fast.power, reference_ddp(g)));
  }
  CheckResult r;
  r.name = "ddp_matches_bruteforce";
  r.value = worst;
  r.limit = 1e-9;
  r.pass = worst <= r.limit;
  r.detail = "max relative Frobenius error over mixed grid sizes up to 16";
  return r;
}

CheckResult check_ddp_mass() {
  double worst = 0.0;
  const int sizes[][2] = {{8, 8}, {12, 7}, {16, 16}};
  for (const auto& sz : sizes) {
    const int m = sz[0], n = sz[1];
    const CMat g = random_grid(m, n, 2000 + m + n);
    const DelayDopplerProfile fast = compute_ddp(g, ones_grid(m, n), 1e6, 1e-4);
    double mass = 0.0;
    for (int p = 0; p < m; ++p) {
      for (int c = 0; c < n; ++c) mass += fast.power(p, c);
    }
    double g2 = 0.0;
    for (int k = 0; k < m; ++k) {
      for (int t = 0; t < n; ++t) g2 += std::norm(g(k, t));
    }
    const double expect = g2 * n / m;
    worst = std::max(worst, std::abs(mass - expect) / expect);
  }
  CheckResult r;
  r.name = "ddp_mass_conservation";
  r.value = worst;
  r.limit = 1e-9;
  r.pass = worst <= r.limit;
  r.detail = "sum of the map must equal (N/M) * ||G||_F^2";
  return r;
}

CheckResult check_pdp_against_bruteforce() {
  double worst = 0.0;
  const int sizes[][2] = {{4, 4}, {9, 6}, {16, 11}};
  for (const auto& sz : sizes) {
    const int m = sz[0], n = sz[1];
    const CMat g = random_grid(m, n, 3000 + m + n);
    const PowerDelayProfile fast = compute_pdp(g, ones_grid(m, n), 1e6);
    const std::vector<double> ref = reference_pdp(g);
    double num = 0.0, den = 0.0;
    for (int p = 0; p < m; ++p) {
      const double d = fast.power[p] - ref[p];
      num += d * d;
      den += ref[p] * ref[p];
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  CheckResult r;
  r.name = "pdp_matches_bruteforce";
  r.value = worst;
  r.limit = 1e-9;
  r.pass = worst <= r.limit;
  r.detail = "max relative error of the averaged delay response power";
  return r;
}

CheckResult check_on_grid_peak() {
  const int m = 16, n = 8;
  const int p0 = 5, q0 = 3;
  const double b = 0.5;
  CMat g(m, n);
  for (int k = 0; k < m; ++k) {
    for (int t = 0; t < n; ++t) {
      g(k, t) = b * unit_phasor(-static_cast<double>(k) * p0 / m) *
                unit_phasor(static_cast<double>(t) * q0 / n);
    }
  }
  const DelayDopplerProfile ddp = compute_ddp(g, ones_grid(m, n), 1e6, 1e-4);
  const double expect = (b * n) * (b * n);
  const double got = ddp.power(p0, n / 2 + q0);
  const double err = std::abs(got - expect) / expect;
  CheckResult r;
  r.name = "on_grid_peak_closed_form";
  r.value = err;
  r.limit = 1e-9;
  r.pass = err <= r.limit;
  r.detail = "a unit on-grid path must focus to (b*N)^2 at its bin";
  return r;
}

CheckResult check_threshold_midpoint() {
  const std::vector<double> e = {-102.0, -98.0, -92.0, -88.0};
  const std::vector<int> y = {0, 0, 1, 1};
  const EnergyDetector det = fit_energy_threshold(e, y);
  const double err = std::abs(det.threshold_dbw - (-95.0));
  CheckResult r;
  r.name = "energy_threshold_midpoint";
  r.value = err;
  r.limit = 1e-12;
  r.pass = err <= r.limit;
  r.detail = "equal-spread classes at -100/-90 dBW must fit a -95 threshold";
  return r;
}

CheckResult check_threshold_crossover() {
  // Unequal spreads: the threshold must satisfy the defining property (equal
  // class log-densities) rather than any particular algebraic form.
  const std::vector<double> e = {-102.0, -98.0, -94.0, -86.0};
  const std::vector<int> y = {0, 0, 1, 1};
  const EnergyDetector det = fit_energy_threshold(e, y);
  const auto logpdf = [](double x, double mu, double s) {
    const double z = (x - mu) / s;
    return -0.5 * z * z - std::log(s);
  };
  const double gap = std::abs(logpdf(det.threshold_dbw, det.mu0, det.sigma0) -
                              logpdf(det.threshold_dbw, det.mu1, det.sigma1));
  CheckResult r;
  r.name = "energy_threshold_crossover";
  r.value = gap;
  r.limit = 1e-9;
  r.pass = gap <= r.limit && det.threshold_dbw > det.mu0 &&
           det.threshold_dbw < det.mu1;
  r.detail = "unequal-spread threshold must equalize the class likelihoods";
  return r;
}

CheckResult gradient_check(const char* name, const CnnConfig& cfg, int rows,
                           int cols, std::uint64_t seed) {
  CnnModel model = CnnModel::init(cfg, seed);
  SplitMix64 rng = derive_stream(seed, Stream::kSelfTest, 99);
  std::vector<float> x(static_cast<std::size_t>(rows) * cols);
  for (float& v : x) v = static_cast<float>(rng.uniform());
  const FeatureView view{x.data(), rows, cols};
  const double err = max_gradient_error(model, view, 1, 40, 1e-5, seed + 1);
  CheckResult r;
  r.name = name;
  r.value = err;
  r.limit = 1e-4;
  r.pass = err <= r.limit;
  r.detail = "analytic vs central-difference gradients, double precision";
  return r;
}

CheckResult check_qpsk_magnitude() {
  const WaveformConfig cfg = WaveformConfig::desk_profile();
  const SymbolGrid g = generate_sensing_grid(cfg, 1);
  double worst = 0.0;
  for (int k = 0; k < g.rows(); ++k) {
    for (int t = 0; t < g.cols(); ++t) {
      worst = std::max(worst, std::abs(std::abs(g(k, t)) - 1.0));
    }
  }
  CheckResult r;
  r.name = "qpsk_unit_magnitude";
  r.value = worst;
  r.limit = 1e-15;
  r.pass = worst <= r.limit;
  r.detail = "every reference symbol must sit on the unit circle";
  return r;
}

CheckResult check_symbol_uniformity() {
  SplitMix64 rng(12345);
  const int draws = 1000000;
  int counts[4] = {0, 0, 0, 0};
  for (int i = 0; i < draws; ++i) counts[rng.next() & 3] += 1;
  const double expect = draws / 4.0;
  double chi2 = 0.0;
  for (int c = 0; c < 4; ++c) {
    const double d = counts[c] - expect;
    chi2 += d * d / expect;
  }
  CheckResult r;
  r.name = "symbol_bits_uniform";
  r.value = chi2;
  r.limit = 16.27;  // chi-square 99.9% quantile, 3 degrees of freedom
  r.pass = chi2 <= r.limit;
  r.detail = "constellation selector bits must be uniform over 4 symbols";
  return r;
}

}  // namespace

std::vector<CheckResult> run_selfchecks() {
  std::vector<CheckResult> out;
  out.push_back(check_ddp_against_bruteforce());
  out.push_back(check_ddp_mass());
  out.push_back(check_pdp_against_bruteforce());
  out.push_back(check_on_grid_peak());
  out.push_back(check_threshold_midpoint());
  out.push_back(check_threshold_crossover());
  out.push_back(gradient_check("gradient_check_map_detector",
                               CnnConfig{InputKind::grid2d, 16, 16}, 16, 16,
                               7001));
  out.push_back(gradient_check("gradient_check_profile_detector",
                               CnnConfig{InputKind::sequence1d, 32, 1}, 32, 1,
                               7002));
  out.push_back(check_qpsk_magnitude());
  out.push_back(check_symbol_uniformity());
  return out;
}

}  // namespace bisense
