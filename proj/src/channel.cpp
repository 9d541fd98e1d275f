#include "bisense/channel.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "bisense/constants.hpp"
#include "bisense/errors.hpp"

namespace bisense {

NoiseSpec noise_from_snr(double snr_db, const Deployment& d,
                         double center_freq_hz) {
  if (!std::isfinite(snr_db)) throw DomainError("snr_db must be finite");
  Deployment open = d;
  open.walls.clear();
  const double b0 = direct_path(open, center_freq_hz).gain_amplitude;
  NoiseSpec n;
  n.snr_db = snr_db;
  n.variance = b0 * b0 / std::pow(10.0, snr_db / 10.0);
  return n;
}

SymbolGrid synthesize_rx_grid(const SymbolGrid& sensing_symbols,
                              const PathSet& paths, double delta_f,
                              double sensing_spacing_s, const NoiseSpec& noise,
                              SplitMix64& rng) {
  if (!(delta_f > 0.0) || !(sensing_spacing_s > 0.0)) {
    throw DomainError("delta_f and sensing spacing must be positive");
  }
  if (noise.variance < 0.0 || !std::isfinite(noise.variance)) {
    throw DomainError("noise variance must be finite and non-negative");
  }
  const int m = sensing_symbols.rows();
  const int n = sensing_symbols.cols();

  // Channel frequency response, accumulated one rank-1 path term at a time.
  CMat h(m, n);
  std::vector<std::complex<double>> delay_ph(m);
  std::vector<std::complex<double>> doppler_ph(n);
  for (const PropagationPath& p : paths) {
    if (!std::isfinite(p.gain_amplitude) || !std::isfinite(p.delay_s) ||
        !std::isfinite(p.doppler_hz)) {
      throw DomainError("propagation path has non-finite parameters");
    }
    for (int k = 0; k < m; ++k) {
      delay_ph[k] = std::polar(
          1.0, -2.0 * std::numbers::pi * k * delta_f * p.delay_s);
    }
    for (int t = 0; t < n; ++t) {
      doppler_ph[t] = std::polar(
          1.0, 2.0 * std::numbers::pi * t * sensing_spacing_s * p.doppler_hz);
    }
    for (int k = 0; k < m; ++k) {
      const std::complex<double> row_term = p.gain_amplitude * delay_ph[k];
      std::complex<double>* hrow = h.row(k);
      for (int t = 0; t < n; ++t) hrow[t] += row_term * doppler_ph[t];
    }
  }

  SymbolGrid r(m, n);
  const bool noiseless = noise.variance == 0.0;
  for (int k = 0; k < m; ++k) {
    const std::complex<double>* srow = sensing_symbols.row(k);
    const std::complex<double>* hrow = h.row(k);
    std::complex<double>* rrow = r.row(k);
    for (int t = 0; t < n; ++t) {
      rrow[t] = srow[t] * hrow[t];
      if (!noiseless) rrow[t] += rng.complex_gaussian(noise.variance);
    }
  }
  return r;
}

}  // namespace bisense
