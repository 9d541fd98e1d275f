#pragma once

#include <vector>

#include "bisense/grid.hpp"

namespace bisense {

// Delay-Doppler power map.  Row p = delay bin p / (M * delta_f); column c =
// Doppler bin (c - N/2) / (N * T) after the fftshift that centers zero
// Doppler.
struct DelayDopplerProfile {
  RMat power;
  double delay_bin_s = 0.0;
  double doppler_bin_hz = 0.0;
};

// Doppler-blind profile for stationary targets: per-symbol delay responses,
// power-averaged over the burst.
struct PowerDelayProfile {
  std::vector<double> power;
  double delay_bin_s = 0.0;
};

// Crop + compression window for detector inputs.
struct RoiSpec {
  int delay_bins = 128;
  int doppler_bins = 128;        // ignored for delay-only profiles
  double dynamic_range_db = 100.0;
};

// Detector-ready tensor: row-major float32, each entry the profile power in
// dB relative to the crop's peak, affinely mapped so the peak is exactly 1
// and anything dynamic_range_db or further below it clamps to 0.  The
// mapping is monotone (peak position survives) and scale-free (profiles
// differing by a constant factor produce the same tensor), so absolute
// energy stays the energy detector's business.  An all-zero crop stays
// all-zero.
struct FeatureTensor {
  std::vector<float> data;
  int rows = 0;
  int cols = 0;          // 1 for delay-only profiles
  int delay_offset = 0;  // first delay bin of the crop
  int doppler_offset = 0;  // first Doppler column of the crop (2-D only)
};

// Deconvolves the reference symbols out of the received grid (elementwise
// division), then runs an unscaled forward DFT along the symbol axis and a
// 1/M-scaled inverse DFT along the subcarrier axis, takes |.|^2, and centers
// the Doppler axis.  Under this normalization an on-grid unit-gain path shows
// up as a peak of (N)^2 and the map's total mass is (N/M) * ||R / S||_F^2.
DelayDopplerProfile compute_ddp(const SymbolGrid& received,
                                const SymbolGrid& sensing_symbols,
                                double delta_f, double sensing_spacing_s);

// Per-symbol 1/M-scaled inverse DFT of the deconvolved grid along the
// subcarrier axis, power-averaged over all N symbols.
PowerDelayProfile compute_pdp(const SymbolGrid& received,
                              const SymbolGrid& sensing_symbols,
                              double delta_f);

// Crops delay bins [0, roi.delay_bins) x centered roi.doppler_bins Doppler
// columns, then applies the compression above.  Throws ShapeError when the
// crop does not fit inside the profile.
FeatureTensor extract_roi(const DelayDopplerProfile& ddp, const RoiSpec& roi);

// Crops the first roi.delay_bins delay bins.
FeatureTensor extract_roi(const PowerDelayProfile& pdp, const RoiSpec& roi);

}  // namespace bisense
