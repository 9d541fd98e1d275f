#include "bisense/fft.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <unordered_map>

namespace bisense {
namespace fft {
namespace {

using cd = std::complex<double>;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Twiddle factors for a radix-2 transform of length n: w[k] = e^{-j*2*pi*k/n}
// for k < n/2.  Cached per length; the tables are immutable once built.
const std::vector<cd>& twiddles(std::size_t n) {
  static std::mutex mu;
  static std::unordered_map<std::size_t, std::vector<cd>> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cd> w(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) /
                       static_cast<double>(n);
    w[k] = std::polar(1.0, ang);
  }
  return cache.emplace(n, std::move(w)).first->second;
}

void radix2(cd* x, std::size_t n, bool inverse) {
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  const std::vector<cd>& w = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        cd tw = w[k * stride];
        if (inverse) tw = std::conj(tw);
        const cd u = x[i + k];
        const cd v = x[i + k + len / 2] * tw;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
      }
    }
  }
}

// Bluestein chirp-z: expresses an arbitrary-length DFT as a convolution that
// a power-of-two transform can evaluate.
void bluestein(cd* x, std::size_t n, bool inverse) {
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  const double sign = inverse ? 1.0 : -1.0;
  std::vector<cd> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the phase argument small for large k.
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = sign * std::numbers::pi * static_cast<double>(k2) /
                       static_cast<double>(n);
    chirp[k] = std::polar(1.0, ang);
  }

  std::vector<cd> a(m, cd{});
  std::vector<cd> b(m, cd{});
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    b[k] = b[m - k] = std::conj(chirp[k]);
  }

  radix2(a.data(), m, false);
  radix2(b.data(), m, false);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  radix2(a.data(), m, true);

  const double scale = 1.0 / static_cast<double>(m);  // undo unscaled inverse
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * scale * chirp[k];
}

}  // namespace

void transform(cd* x, std::size_t n, bool inverse) {
  if (n <= 1) return;
  if (is_pow2(n)) {
    radix2(x, n, inverse);
  } else {
    bluestein(x, n, inverse);
  }
}

}  // namespace fft
}  // namespace bisense
