#pragma once

#include <cstddef>
#include <vector>

#include "fadec/core/tensor.hpp"

namespace fadec {

/// Sampling coordinates for grid_sample: h x w points of (row, col) in
/// absolute source-pixel units, stored interleaved.
class Grid {
 public:
  Grid() = default;
  /// Throws ShapeError on a length mismatch, InvalidData on non-finite values.
  Grid(std::size_t h, std::size_t w, std::vector<float> data);

  /// g(s, t) = (s, t).
  static Grid identity(std::size_t h, std::size_t w);

  std::size_t height() const noexcept { return h_; }
  std::size_t width() const noexcept { return w_; }
  const std::vector<float>& data() const noexcept { return data_; }
  float row(std::size_t s, std::size_t t) const { return data_[2 * (s * w_ + t)]; }
  float col(std::size_t s, std::size_t t) const { return data_[2 * (s * w_ + t) + 1]; }

 private:
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  std::vector<float> data_;
};

/// Bilinear four-tap sampling of every channel of a CHW tensor:
///   (i, j) = floor(g), (k, l) = g - (i, j)
///   y = (1-k)(1-l) x[i,j] + (1-k) l x[i,j+1] + k (1-l) x[i+1,j] + k l x[i+1,j+1]
/// Taps outside the input read as zero; weights are never renormalized.
FTensor grid_sample(const FTensor& x, const Grid& g);

/// Each pixel replicated factor x factor times. Works on any rank >= 2; the
/// last two axes are spatial.
FTensor upsample_nearest(const FTensor& x, std::size_t factor);
QTensor upsample_nearest(const QTensor& x, std::size_t factor);

/// Bilinear upsampling with half-pixel centers (align_corners = false):
/// output pixel o samples source coordinate (o + 0.5) / factor - 0.5,
/// clamped to the valid range.
FTensor upsample_bilinear(const FTensor& x, std::size_t factor);

}  // namespace fadec
