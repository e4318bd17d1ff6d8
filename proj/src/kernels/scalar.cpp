#include <cmath>

#include "kernels_internal.hpp"

namespace fadec::kernels::scalar {

void axpy_f32(float a, const float* x, std::size_t x_stride, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i * x_stride];
}

void axpy_i64(std::int32_t a, const std::int32_t* x, std::size_t x_stride, std::int64_t* y,
              std::size_t n) {
  const std::int64_t a64 = a;
  for (std::size_t i = 0; i < n; ++i) y[i] += a64 * x[i * x_stride];
}

void mul_acc_f32(const float* a, const float* b, float* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += a[i] * b[i];
}

void grid_sample_plane(const float* src, std::size_t h, std::size_t w, const float* grid,
                       float* dst, std::size_t n) {
  const float hi_r = static_cast<float>(h) + 1.0f;
  const float hi_c = static_cast<float>(w) + 1.0f;
  const auto tap = [&](long long r, long long c) {
    return (r >= 0 && c >= 0 && r < static_cast<long long>(h) && c < static_cast<long long>(w))
               ? src[static_cast<std::size_t>(r) * w + static_cast<std::size_t>(c)]
               : 0.0f;
  };
  for (std::size_t p = 0; p < n; ++p) {
    // Coordinates beyond one pixel outside the plane only ever hit zero
    // taps; clamping keeps floor() within int range.
    const float gr = std::fmin(std::fmax(grid[2 * p], -2.0f), hi_r);
    const float gc = std::fmin(std::fmax(grid[2 * p + 1], -2.0f), hi_c);
    const float fr = std::floor(gr);
    const float fc = std::floor(gc);
    const float k = gr - fr;
    const float l = gc - fc;
    const auto i = static_cast<long long>(fr);
    const auto j = static_cast<long long>(fc);
    dst[p] = (1.0f - k) * (1.0f - l) * tap(i, j) + (1.0f - k) * l * tap(i, j + 1) +
             k * (1.0f - l) * tap(i + 1, j) + k * l * tap(i + 1, j + 1);
  }
}

const KernelTable kTable{Isa::kScalar, axpy_f32, axpy_i64, mul_acc_f32, grid_sample_plane};

}  // namespace fadec::kernels::scalar
