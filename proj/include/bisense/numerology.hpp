#pragma once

#include <cstdint>
#include <string>

#include "bisense/grid.hpp"

namespace bisense {

// OFDM waveform description.  A fraction mu of the frame is sensing payload:
// one sensing symbol every 1/mu symbol slots, N of them per coherent
// processing interval.
struct WaveformConfig {
  double bandwidth_hz = 0.0;
  double center_freq_hz = 0.0;
  int num_subcarriers = 0;           // M
  double subcarrier_spacing_hz = 0.0;  // delta_f
  double sensing_fraction = 0.0;     // mu in (0, 1]
  int num_sensing_symbols = 0;       // N
  std::uint64_t seed = 0;            // default seed for the reference grid

  // Throws ConfigError when any field is outside its domain or the
  // bandwidth disagrees with M * delta_f by more than 1 ppm.
  void validate() const;

  // Strict JSON mapping: exactly the keys below, all but "seed" required.
  //   bandwidth_hz, center_freq_hz, num_subcarriers, subcarrier_spacing_hz,
  //   sensing_fraction, num_sensing_symbols, seed
  static WaveformConfig from_json_text(const std::string& text);
  static WaveformConfig from_json_file(const std::string& path);
  std::string to_json_text() const;

  // mmWave profile matching the published system scale: B = 500 MHz at
  // 28 GHz, M = N = 1024, mu = 0.1.  delta_f is B / M; the CPI works out to
  // 20.97 ms.
  static WaveformConfig full_profile();

  // Shrunk profile for desk-scale experiments: M = 256, N = 128.  The
  // subcarrier spacing is widened to 1.92 MHz so the delay axis still
  // resolves indoor bistatic geometry (0.61 m range bins), and mu is chosen
  // so the CPI (21.33 ms) and hence the velocity resolution stay at the
  // full-scale figure.
  static WaveformConfig desk_profile();
};

// Quantities derived from a WaveformConfig; speed_of_light records the
// constant the resolution/ambiguity figures were computed against.
struct DerivedParams {
  double symbol_duration_s = 0.0;     // T_sym = 1 / delta_f
  double sensing_spacing_s = 0.0;     // T = T_sym / mu, sensing-symbol period
  double cpi_s = 0.0;                 // T_c = N * T
  double range_resolution_m = 0.0;    // c / B  (bistatic range-sum bins)
  double velocity_resolution_mps = 0.0;  // c / (T_c * f_c)
  double wavelength_m = 0.0;          // c / f_c
  double max_unambiguous_delay_s = 0.0;    // 1 / delta_f
  double max_unambiguous_doppler_hz = 0.0; // 1 / (2T), either sign
  double speed_of_light = 0.0;
};

DerivedParams derive_params(const WaveformConfig& cfg);

// M x N grid of unit-magnitude QPSK reference symbols, row-major fill from
// one dedicated RNG stream of `seed`.
SymbolGrid generate_sensing_grid(const WaveformConfig& cfg, std::uint64_t seed);

}  // namespace bisense
