#pragma once

// Straight-line reference evaluations used as test oracles. They share no
// code with the library beyond the tensor containers.

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "fadec/core/rng.hpp"
#include "fadec/core/tensor.hpp"
#include "fadec/ops/conv.hpp"
#include "fadec/ops/resample.hpp"

namespace fadec::oracle {

inline FTensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  std::vector<float> v(element_count(shape));
  for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return FTensor(std::move(shape), std::move(v));
}

inline QTensor random_qtensor(Rng& rng, Shape shape, int bits, int exp, std::int64_t mag) {
  std::vector<std::int32_t> v(element_count(shape));
  for (auto& x : v) x = static_cast<std::int32_t>(rng.integer(-mag, mag));
  return QTensor(std::move(shape), std::move(v), bits, exp);
}

inline double per_channel(const FTensor& t, std::size_t c) { return t.size() == 1 ? t[0] : t[c]; }

/// Direct evaluation of y = (sum W x + b) * s in double, zero padding.
inline std::vector<double> conv(const FTensor& x, const ConvSpec& sp, const FTensor& w,
                                const FTensor& b, const FTensor& s) {
  const std::size_t H = x.dim(1), W = x.dim(2);
  const std::size_t k = static_cast<std::size_t>(sp.kernel);
  const std::size_t oh = (H + 2 * sp.padding - k) / sp.stride + 1;
  const std::size_t ow = (W + 2 * sp.padding - k) / sp.stride + 1;
  std::vector<double> y(sp.out_ch * oh * ow);
  for (std::size_t o = 0; o < sp.out_ch; ++o) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        double acc = 0.0;
        for (std::size_t c = 0; c < sp.in_ch; ++c) {
          for (std::size_t u = 0; u < k; ++u) {
            for (std::size_t v = 0; v < k; ++v) {
              const long long r = static_cast<long long>(i * sp.stride + u) - sp.padding;
              const long long q = static_cast<long long>(j * sp.stride + v) - sp.padding;
              if (r < 0 || q < 0 || r >= static_cast<long long>(H) || q >= static_cast<long long>(W)) continue;
              acc += static_cast<double>(w[((o * sp.in_ch + c) * k + u) * k + v]) *
                     x.at(c, static_cast<std::size_t>(r), static_cast<std::size_t>(q));
            }
          }
        }
        y[(o * oh + i) * ow + j] = (acc + per_channel(b, o)) * per_channel(s, o);
      }
    }
  }
  return y;
}

/// Integer form of the same loop nest: m1 = sum W x + b, m2 = m1 * s.
inline std::vector<std::int64_t> conv_m2(const QTensor& x, const ConvSpec& sp, const QTensor& w,
                                         const QTensor& b, const QTensor& s) {
  const std::size_t H = x.dim(1), W = x.dim(2);
  const std::size_t k = static_cast<std::size_t>(sp.kernel);
  const std::size_t oh = (H + 2 * sp.padding - k) / sp.stride + 1;
  const std::size_t ow = (W + 2 * sp.padding - k) / sp.stride + 1;
  std::vector<std::int64_t> y(sp.out_ch * oh * ow);
  for (std::size_t o = 0; o < sp.out_ch; ++o) {
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        std::int64_t acc = 0;
        for (std::size_t c = 0; c < sp.in_ch; ++c) {
          for (std::size_t u = 0; u < k; ++u) {
            for (std::size_t v = 0; v < k; ++v) {
              const long long r = static_cast<long long>(i * sp.stride + u) - sp.padding;
              const long long q = static_cast<long long>(j * sp.stride + v) - sp.padding;
              if (r < 0 || q < 0 || r >= static_cast<long long>(H) || q >= static_cast<long long>(W)) continue;
              acc += static_cast<std::int64_t>(w[((o * sp.in_ch + c) * k + u) * k + v]) *
                     x[(c * H + static_cast<std::size_t>(r)) * W + static_cast<std::size_t>(q)];
            }
          }
        }
        acc += b.size() == 1 ? b[0] : b[o];
        y[(o * oh + i) * ow + j] = acc * (s.size() == 1 ? s[0] : s[o]);
      }
    }
  }
  return y;
}

/// Four-tap bilinear sample at (gr, gc), zero outside, evaluated in float in
/// the order the formula is written.
inline float bilinear_tap(const FTensor& x, std::size_t c, float gr, float gc) {
  const long long H = static_cast<long long>(x.dim(1));
  const long long W = static_cast<long long>(x.dim(2));
  const float fi = std::floor(gr);
  const float fj = std::floor(gc);
  const float k = gr - fi;
  const float l = gc - fj;
  const auto at = [&](double r, double q) -> float {
    if (r < 0 || q < 0 || r >= static_cast<double>(H) || q >= static_cast<double>(W)) return 0.0f;
    return x.at(c, static_cast<std::size_t>(r), static_cast<std::size_t>(q));
  };
  const double i = fi, j = fj;
  return (1.0f - k) * (1.0f - l) * at(i, j) + (1.0f - k) * l * at(i, j + 1) +
         k * (1.0f - l) * at(i + 1, j) + k * l * at(i + 1, j + 1);
}

inline std::vector<float> grid_sample(const FTensor& x, const Grid& g) {
  std::vector<float> y(x.dim(0) * g.height() * g.width());
  for (std::size_t c = 0; c < x.dim(0); ++c) {
    for (std::size_t s = 0; s < g.height(); ++s) {
      for (std::size_t t = 0; t < g.width(); ++t) {
        y[(c * g.height() + s) * g.width() + t] = bilinear_tap(x, c, g.row(s, t), g.col(s, t));
      }
    }
  }
  return y;
}

inline double max_rel_error(const std::vector<double>& ref, std::span<const float> got) {
  double scale = 0.0, err = 0.0;
  for (double v : ref) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < ref.size(); ++i) err = std::max(err, std::abs(ref[i] - got[i]));
  return scale > 0 ? err / scale : err;
}

}  // namespace fadec::oracle
