// AVX2 variants. This translation unit is the only one built with -mavx2;
// callers reach it through the dispatch table after a CPU check.

#include <immintrin.h>

#include "kernels_internal.hpp"

namespace fadec::kernels::avx2 {
namespace {

constexpr std::size_t kLanes = 8;

__m256i lane_offsets(std::size_t stride) {
  const auto s = static_cast<int>(stride);
  return _mm256_setr_epi32(0, s, 2 * s, 3 * s, 4 * s, 5 * s, 6 * s, 7 * s);
}

}  // namespace

void axpy_f32(float a, const float* x, std::size_t x_stride, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  if (x_stride == 1) {
    for (; i + kLanes <= n; i += kLanes) {
      const __m256 prod = _mm256_mul_ps(va, _mm256_loadu_ps(x + i));
      _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
    }
  } else {
    const __m256i offs = lane_offsets(x_stride);
    for (; i + kLanes <= n; i += kLanes) {
      const __m256 xv = _mm256_i32gather_ps(x + i * x_stride, offs, 4);
      const __m256 prod = _mm256_mul_ps(va, xv);
      _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
    }
  }
  scalar::kTable.axpy_f32(a, x + i * x_stride, x_stride, y + i, n - i);
}

void axpy_i64(std::int32_t a, const std::int32_t* x, std::size_t x_stride, std::int64_t* y,
              std::size_t n) {
  const __m256i va = _mm256_set1_epi64x(a);
  const __m256i offs = lane_offsets(x_stride);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256i xv =
        x_stride == 1
            ? _mm256_loadu_si256(reinterpret_cast<const __m256i*>(x + i))
            : _mm256_i32gather_epi32(reinterpret_cast<const int*>(x + i * x_stride), offs, 4);
    const __m256i lo = _mm256_cvtepi32_epi64(_mm256_castsi256_si128(xv));
    const __m256i hi = _mm256_cvtepi32_epi64(_mm256_extracti128_si256(xv, 1));
    // _mm256_mul_epi32 multiplies the signed low halves: exact 64-bit products.
    auto* y0 = reinterpret_cast<__m256i*>(y + i);
    auto* y1 = reinterpret_cast<__m256i*>(y + i + 4);
    _mm256_storeu_si256(y0, _mm256_add_epi64(_mm256_loadu_si256(y0), _mm256_mul_epi32(lo, va)));
    _mm256_storeu_si256(y1, _mm256_add_epi64(_mm256_loadu_si256(y1), _mm256_mul_epi32(hi, va)));
  }
  scalar::kTable.axpy_i64(a, x + i * x_stride, x_stride, y + i, n - i);
}

void mul_acc_f32(const float* a, const float* b, float* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256 prod = _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    _mm256_storeu_ps(acc + i, _mm256_add_ps(_mm256_loadu_ps(acc + i), prod));
  }
  scalar::kTable.mul_acc_f32(a + i, b + i, acc + i, n - i);
}

void grid_sample_plane(const float* src, std::size_t h, std::size_t w, const float* grid,
                       float* dst, std::size_t n) {
  const __m256 one = _mm256_set1_ps(1.0f);
  const __m256 lo = _mm256_set1_ps(-2.0f);
  const __m256 hi_r = _mm256_set1_ps(static_cast<float>(h) + 1.0f);
  const __m256 hi_c = _mm256_set1_ps(static_cast<float>(w) + 1.0f);
  const __m256i vh = _mm256_set1_epi32(static_cast<int>(h));
  const __m256i vw = _mm256_set1_epi32(static_cast<int>(w));
  const __m256i neg1 = _mm256_set1_epi32(-1);
  const __m256i ione = _mm256_set1_epi32(1);
  const __m256 zero = _mm256_setzero_ps();

  // 0 <= v < extent, as an all-ones lane mask.
  const auto in_range = [&](__m256i v, __m256i extent) {
    return _mm256_and_si256(_mm256_cmpgt_epi32(v, neg1), _mm256_cmpgt_epi32(extent, v));
  };
  const auto gather = [&](__m256i r_ok, __m256i c_ok, __m256i idx) {
    const __m256 mask = _mm256_castsi256_ps(_mm256_and_si256(r_ok, c_ok));
    return _mm256_mask_i32gather_ps(zero, src, idx, mask, 4);
  };

  std::size_t p = 0;
  for (; p + kLanes <= n; p += kLanes) {
    const __m256 a = _mm256_loadu_ps(grid + 2 * p);      // r0 c0 r1 c1 | r2 c2 r3 c3
    const __m256 b = _mm256_loadu_ps(grid + 2 * p + 8);  // r4 c4 r5 c5 | r6 c6 r7 c7
    const __m256 rows_x = _mm256_shuffle_ps(a, b, _MM_SHUFFLE(2, 0, 2, 0));
    const __m256 cols_x = _mm256_shuffle_ps(a, b, _MM_SHUFFLE(3, 1, 3, 1));
    // Undo the 128-bit lane split: (r0 r1 r4 r5 | r2 r3 r6 r7) -> r0..r7.
    const __m256 gr_raw = _mm256_castpd_ps(
        _mm256_permute4x64_pd(_mm256_castps_pd(rows_x), _MM_SHUFFLE(3, 1, 2, 0)));
    const __m256 gc_raw = _mm256_castpd_ps(
        _mm256_permute4x64_pd(_mm256_castps_pd(cols_x), _MM_SHUFFLE(3, 1, 2, 0)));

    const __m256 gr = _mm256_min_ps(_mm256_max_ps(gr_raw, lo), hi_r);
    const __m256 gc = _mm256_min_ps(_mm256_max_ps(gc_raw, lo), hi_c);
    const __m256 fr = _mm256_floor_ps(gr);
    const __m256 fc = _mm256_floor_ps(gc);
    const __m256 k = _mm256_sub_ps(gr, fr);
    const __m256 l = _mm256_sub_ps(gc, fc);
    const __m256i i0 = _mm256_cvttps_epi32(fr);
    const __m256i j0 = _mm256_cvttps_epi32(fc);
    const __m256i i1 = _mm256_add_epi32(i0, ione);
    const __m256i j1 = _mm256_add_epi32(j0, ione);

    const __m256i r0_ok = in_range(i0, vh);
    const __m256i r1_ok = in_range(i1, vh);
    const __m256i c0_ok = in_range(j0, vw);
    const __m256i c1_ok = in_range(j1, vw);
    const __m256i base0 = _mm256_mullo_epi32(i0, vw);
    const __m256i base1 = _mm256_add_epi32(base0, vw);

    const __m256 x00 = gather(r0_ok, c0_ok, _mm256_add_epi32(base0, j0));
    const __m256 x01 = gather(r0_ok, c1_ok, _mm256_add_epi32(base0, j1));
    const __m256 x10 = gather(r1_ok, c0_ok, _mm256_add_epi32(base1, j0));
    const __m256 x11 = gather(r1_ok, c1_ok, _mm256_add_epi32(base1, j1));

    const __m256 omk = _mm256_sub_ps(one, k);
    const __m256 oml = _mm256_sub_ps(one, l);
    __m256 y = _mm256_mul_ps(_mm256_mul_ps(omk, oml), x00);
    y = _mm256_add_ps(y, _mm256_mul_ps(_mm256_mul_ps(omk, l), x01));
    y = _mm256_add_ps(y, _mm256_mul_ps(_mm256_mul_ps(k, oml), x10));
    y = _mm256_add_ps(y, _mm256_mul_ps(_mm256_mul_ps(k, l), x11));
    _mm256_storeu_ps(dst + p, y);
  }
  scalar::kTable.grid_sample_plane(src, h, w, grid + 2 * p, dst + p, n - p);
}

const KernelTable kTable{Isa::kAvx2, axpy_f32, axpy_i64, mul_acc_f32, grid_sample_plane};

}  // namespace fadec::kernels::avx2
