#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "bisense/errors.hpp"

namespace bisense {

// Dense row-major matrix.  Rows index the subcarrier/delay axis, columns the
// symbol/Doppler axis throughout the pipeline.
template <typename T>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), d_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows <= 0 || cols <= 0) {
      throw ShapeError("matrix dimensions must be positive");
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return d_.size(); }

  T& operator()(int r, int c) { return d_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const {
    return d_[static_cast<std::size_t>(r) * cols_ + c];
  }

  T* row(int r) { return d_.data() + static_cast<std::size_t>(r) * cols_; }
  const T* row(int r) const { return d_.data() + static_cast<std::size_t>(r) * cols_; }

  T* data() { return d_.data(); }
  const T* data() const { return d_.data(); }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> d_;
};

using CMat = Mat<std::complex<double>>;
using RMat = Mat<double>;

// M x N grid of frequency-domain symbols: row k = subcarrier, column n = OFDM
// symbol index within the sensing burst.
using SymbolGrid = CMat;

}  // namespace bisense
