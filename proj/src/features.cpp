#include "bisense/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "bisense/errors.hpp"
#include "bisense/fft.hpp"

namespace bisense {

namespace {

// R / S elementwise; the unit-magnitude reference symbols make this a pure
// phase rotation plus the path gains.
CMat deconvolve(const SymbolGrid& received, const SymbolGrid& sensing_symbols) {
  if (!received.same_shape(sensing_symbols)) {
    throw ShapeError("received and reference grids differ in shape");
  }
  CMat g(received.rows(), received.cols());
  for (int k = 0; k < g.rows(); ++k) {
    const std::complex<double>* r = received.row(k);
    const std::complex<double>* s = sensing_symbols.row(k);
    std::complex<double>* out = g.row(k);
    for (int n = 0; n < g.cols(); ++n) {
      if (s[n] == std::complex<double>{}) {
        throw DomainError("reference grid contains a zero symbol");
      }
      out[n] = r[n] / s[n];
    }
  }
  return g;
}

void fill_tensor(FeatureTensor& t, const std::vector<double>& vals,
                 double dynamic_range_db) {
  const double peak = *std::max_element(vals.begin(), vals.end());
  t.data.resize(vals.size());
  if (!(peak > 0.0)) {
    std::fill(t.data.begin(), t.data.end(), 0.0f);
    return;
  }
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double rel = vals[i] / peak;
    double x = 0.0;
    if (rel > 0.0) {
      x = 1.0 + 10.0 * std::log10(rel) / dynamic_range_db;
      x = std::clamp(x, 0.0, 1.0);
    }
    t.data[i] = static_cast<float>(x);
  }
}

}  // namespace

DelayDopplerProfile compute_ddp(const SymbolGrid& received,
                                const SymbolGrid& sensing_symbols,
                                double delta_f, double sensing_spacing_s) {
  if (!(delta_f > 0.0) || !(sensing_spacing_s > 0.0)) {
    throw DomainError("delta_f and sensing spacing must be positive");
  }
  CMat g = deconvolve(received, sensing_symbols);
  const int m = g.rows();
  const int n = g.cols();

  // Doppler axis: unscaled forward DFT over the symbol index of each row.
  for (int k = 0; k < m; ++k) fft::forward(g.row(k), n);

  // Delay axis: 1/M-scaled inverse DFT over the subcarrier index of each
  // column (strided access, so bounce through a contiguous buffer).
  std::vector<std::complex<double>> col(m);
  const double inv_m = 1.0 / m;
  for (int q = 0; q < n; ++q) {
    for (int k = 0; k < m; ++k) col[k] = g(k, q);
    fft::inverse(col.data(), m);
    for (int k = 0; k < m; ++k) g(k, q) = col[k] * inv_m;
  }

  DelayDopplerProfile ddp;
  ddp.power = RMat(m, n);
  const int half = n / 2;
  for (int p = 0; p < m; ++p) {
    for (int c = 0; c < n; ++c) {
      const int raw = (c - half + n) % n;  // fftshift: zero Doppler at n/2
      ddp.power(p, c) = std::norm(g(p, raw));
    }
  }
  ddp.delay_bin_s = 1.0 / (m * delta_f);
  ddp.doppler_bin_hz = 1.0 / (n * sensing_spacing_s);
  return ddp;
}

PowerDelayProfile compute_pdp(const SymbolGrid& received,
                              const SymbolGrid& sensing_symbols,
                              double delta_f) {
  if (!(delta_f > 0.0)) throw DomainError("delta_f must be positive");
  CMat g = deconvolve(received, sensing_symbols);
  const int m = g.rows();
  const int n = g.cols();

  PowerDelayProfile pdp;
  pdp.power.assign(m, 0.0);
  std::vector<std::complex<double>> col(m);
  const double inv_m = 1.0 / m;
  for (int t = 0; t < n; ++t) {
    for (int k = 0; k < m; ++k) col[k] = g(k, t);
    fft::inverse(col.data(), m);
    for (int k = 0; k < m; ++k) pdp.power[k] += std::norm(col[k] * inv_m);
  }
  for (double& v : pdp.power) v /= n;
  pdp.delay_bin_s = 1.0 / (m * delta_f);
  return pdp;
}

FeatureTensor extract_roi(const DelayDopplerProfile& ddp, const RoiSpec& roi) {
  if (roi.delay_bins <= 0 || roi.doppler_bins <= 0 ||
      !(roi.dynamic_range_db > 0.0)) {
    throw ConfigError("roi dimensions and dynamic range must be positive");
  }
  const int m = ddp.power.rows();
  const int n = ddp.power.cols();
  if (roi.delay_bins > m || roi.doppler_bins > n) {
    throw ShapeError("roi crop exceeds delay-Doppler profile bounds");
  }
  FeatureTensor t;
  t.rows = roi.delay_bins;
  t.cols = roi.doppler_bins;
  t.delay_offset = 0;
  t.doppler_offset = n / 2 - roi.doppler_bins / 2;
  std::vector<double> vals(static_cast<std::size_t>(t.rows) * t.cols);
  for (int p = 0; p < t.rows; ++p) {
    for (int c = 0; c < t.cols; ++c) {
      vals[static_cast<std::size_t>(p) * t.cols + c] =
          ddp.power(p + t.delay_offset, c + t.doppler_offset);
    }
  }
  fill_tensor(t, vals, roi.dynamic_range_db);
  return t;
}

FeatureTensor extract_roi(const PowerDelayProfile& pdp, const RoiSpec& roi) {
  if (roi.delay_bins <= 0 || !(roi.dynamic_range_db > 0.0)) {
    throw ConfigError("roi dimensions and dynamic range must be positive");
  }
  if (roi.delay_bins > static_cast<int>(pdp.power.size())) {
    throw ShapeError("roi crop exceeds power-delay profile bounds");
  }
  FeatureTensor t;
  t.rows = roi.delay_bins;
  t.cols = 1;
  t.delay_offset = 0;
  t.doppler_offset = 0;
  std::vector<double> vals(pdp.power.begin(),
                           pdp.power.begin() + roi.delay_bins);
  fill_tensor(t, vals, roi.dynamic_range_db);
  return t;
}

}  // namespace bisense
