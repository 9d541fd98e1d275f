#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace bisense {
namespace fft {

// In-place DFT of length n (any n >= 1).  Forward uses the e^{-j2*pi*k*n/N}
// kernel, inverse uses e^{+j2*pi*k*n/N}.  Neither direction scales: callers
// that want a unitary or 1/N convention apply it themselves, which keeps the
// normalization of the sensing pipeline in exactly one place.
//
// Power-of-two lengths run an iterative radix-2 butterfly; other lengths go
// through Bluestein's chirp-z reduction to a power-of-two convolution.
void transform(std::complex<double>* x, std::size_t n, bool inverse);

inline void forward(std::complex<double>* x, std::size_t n) {
  transform(x, n, false);
}
inline void inverse(std::complex<double>* x, std::size_t n) {
  transform(x, n, true);
}

inline void forward(std::vector<std::complex<double>>& x) {
  transform(x.data(), x.size(), false);
}
inline void inverse(std::vector<std::complex<double>>& x) {
  transform(x.data(), x.size(), true);
}

}  // namespace fft
}  // namespace bisense
