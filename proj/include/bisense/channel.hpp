#pragma once

#include "bisense/geometry.hpp"
#include "bisense/grid.hpp"
#include "bisense/rng.hpp"

namespace bisense {

// Receiver noise level.  variance is the total per-resource-element variance
// of the circularly-symmetric complex noise term.
struct NoiseSpec {
  double snr_db = 0.0;
  double variance = 0.0;
};

// Calibrates the noise variance so that snr_db is the per-element symbol SNR
// of the *unobstructed* direct path: beta^2 = b_0^2 / 10^(snr/10), with b_0
// evaluated from the terminal separation as if no wall intervened.  Keeping
// the reference independent of the wall layout means a given snr_db injects
// the same noise power in LOS and NLOS scenes, so detector curves across
// scenarios share an axis.
NoiseSpec noise_from_snr(double snr_db, const Deployment& d,
                         double center_freq_hz);

// Frequency-domain received grid over one coherent processing interval:
//   R[k][n] = sum_l b_l * S[k][n] * e^{-j2 pi k df tau_l} * e^{+j2 pi n T nu_l}
//             + W[k][n]
// with W drawn i.i.d. complex normal (variance noise.variance) from `rng` in
// row-major order.  delta_f is the subcarrier spacing, sensing_spacing_s the
// period T between consecutive sensing symbols.
SymbolGrid synthesize_rx_grid(const SymbolGrid& sensing_symbols,
                              const PathSet& paths, double delta_f,
                              double sensing_spacing_s, const NoiseSpec& noise,
                              SplitMix64& rng);

}  // namespace bisense
