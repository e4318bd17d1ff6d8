#include "fadec/ops/conv.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fadec/core/error.hpp"
#include "fadec/kernels/kernels.hpp"
#include "fadec/numerics/fixed_point.hpp"

namespace fadec {

bool is_supported_conv(int kernel, int stride) {
  return (kernel == 1 && stride == 1) || (kernel == 3 && (stride == 1 || stride == 2)) ||
         (kernel == 5 && (stride == 1 || stride == 2));
}

ConvSpec ConvSpec::make(int kernel, int stride, std::size_t in_ch, std::size_t out_ch) {
  ConvSpec s{kernel, stride, in_ch, out_ch, (kernel - 1) / 2};
  s.validate();
  return s;
}

void ConvSpec::validate() const {
  if (!is_supported_conv(kernel, stride)) {
    throw ConfigError("unsupported conv (" + std::to_string(kernel) + ", " +
                      std::to_string(stride) + ")");
  }
  if (in_ch == 0 || out_ch == 0) throw ConfigError("conv channel count must be positive");
  if (padding < 0) throw ConfigError("negative conv padding");
}

std::size_t conv_output_extent(std::size_t in, const ConvSpec& spec) {
  const long long span = static_cast<long long>(in) + 2LL * spec.padding - spec.kernel;
  if (span < 0) throw ShapeError("input extent " + std::to_string(in) + " smaller than kernel");
  return static_cast<std::size_t>(span / spec.stride + 1);
}

namespace {

struct Geometry {
  std::size_t in_h, in_w, out_h, out_w;
};

Geometry check_conv_shapes(const Shape& x, const Shape& w, std::size_t b_size, std::size_t s_size,
                           const ConvSpec& spec) {
  spec.validate();
  if (x.size() != 3) throw ShapeError("conv input must be CHW, got " + to_string(x));
  if (x[0] != spec.in_ch) {
    throw ShapeError("conv input has " + std::to_string(x[0]) + " channels, spec expects " +
                     std::to_string(spec.in_ch));
  }
  const auto k = static_cast<std::size_t>(spec.kernel);
  if (w != Shape{spec.out_ch, spec.in_ch, k, k}) {
    throw ShapeError("conv weight " + to_string(w) + " does not match spec");
  }
  for (auto n : {b_size, s_size}) {
    if (n != spec.out_ch && n != 1) throw ShapeError("conv bias/scale must be per-channel or scalar");
  }
  return {x[1], x[2], conv_output_extent(x[1], spec), conv_output_extent(x[2], spec)};
}

// Output-column range [lo, hi) whose tap kx lands inside the input row.
std::pair<std::size_t, std::size_t> valid_columns(const Geometry& g, const ConvSpec& spec, int kx) {
  const long long pad = spec.padding;
  const long long s = spec.stride;
  long long lo = pad - kx > 0 ? (pad - kx + s - 1) / s : 0;
  long long hi = (static_cast<long long>(g.in_w) - 1 - kx + pad);
  hi = hi < 0 ? 0 : hi / s + 1;
  hi = std::min<long long>(hi, static_cast<long long>(g.out_w));
  if (lo > hi) lo = hi;
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

// Accumulates sum_{ic,ky,kx} w * x into acc (out_ch x out_h x out_w) using
// the given axpy kernel; identical tap order for float and integer paths.
template <typename Acc, typename In, typename Weight, typename Axpy>
void accumulate(std::span<const In> x, std::span<const Weight> w, const ConvSpec& spec,
                const Geometry& g, std::vector<Acc>& acc, Axpy axpy) {
  const auto k = static_cast<std::size_t>(spec.kernel);
  const auto stride = static_cast<std::size_t>(spec.stride);
  const std::size_t out_plane = g.out_h * g.out_w;
  const std::size_t in_plane = g.in_h * g.in_w;
  for (std::size_t oc = 0; oc < spec.out_ch; ++oc) {
    Acc* out = acc.data() + oc * out_plane;
    for (std::size_t ic = 0; ic < spec.in_ch; ++ic) {
      const In* in = x.data() + ic * in_plane;
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          const auto a = w[((oc * spec.in_ch + ic) * k + ky) * k + kx];
          const auto [lo, hi] = valid_columns(g, spec, static_cast<int>(kx));
          if (lo >= hi) continue;
          for (std::size_t oy = 0; oy < g.out_h; ++oy) {
            const long long iy = static_cast<long long>(oy * stride + ky) - spec.padding;
            if (iy < 0 || iy >= static_cast<long long>(g.in_h)) continue;
            const std::size_t ix = lo * stride + kx - static_cast<std::size_t>(spec.padding);
            axpy(a, in + static_cast<std::size_t>(iy) * g.in_w + ix, stride,
                 out + oy * g.out_w + lo, hi - lo);
          }
        }
      }
    }
  }
}

}  // namespace

FTensor conv2d_float(const FTensor& x, const ConvSpec& spec, const FTensor& w, const FTensor& b,
                     const FTensor& s) {
  const Geometry g = check_conv_shapes(x.shape(), w.shape(), b.size(), s.size(), spec);
  const std::size_t plane = g.out_h * g.out_w;
  std::vector<float> acc(spec.out_ch * plane, 0.0f);
  const auto& kt = kernels::active();
  accumulate<float, float, float>(x.data(), w.data(), spec, g, acc, kt.axpy_f32);
  for (std::size_t oc = 0; oc < spec.out_ch; ++oc) {
    const float bias = b[b.size() == 1 ? 0 : oc];
    const float scale = s[s.size() == 1 ? 0 : oc];
    for (std::size_t i = 0; i < plane; ++i) {
      float& v = acc[oc * plane + i];
      v = (v + bias) * scale;
    }
  }
  return FTensor({spec.out_ch, g.out_h, g.out_w}, std::move(acc));
}

void check_accumulator_width(const ConvSpec& spec, int weight_bits, int act_bits, int bias_bits,
                             int scale_bits) {
  // log2 of the worst case: taps * 2^(wb-1) * 2^(ab-1) + 2^(bb-1), times 2^(sb-1).
  const double taps = static_cast<double>(spec.in_ch) * spec.kernel * spec.kernel;
  const double m1 = std::ldexp(taps, weight_bits + act_bits - 2) + std::ldexp(1.0, bias_bits - 1);
  const double m2_log2 = std::log2(m1) + (scale_bits - 1);
  if (m2_log2 >= 63.0) {
    throw ConfigError("accumulator overflow: worst case needs " + std::to_string(m2_log2) +
                      " bits for a conv with " + std::to_string(spec.in_ch) + " input channels");
  }
}

QTensor conv2d_quant(const QTensor& x, const ConvSpec& spec, const QTensor& w, const QTensor& b,
                     const QTensor& s, int r, int out_bits, bool relu) {
  const Geometry g = check_conv_shapes(x.shape(), w.shape(), b.size(), s.size(), spec);
  if (r < 0) {
    throw ConfigError("negative right shift " + std::to_string(r) +
                      ": output exponent exceeds the product exponent");
  }
  if (b.exp() != x.exp() + w.exp()) {
    throw ConfigError("bias exponent " + std::to_string(b.exp()) +
                      " differs from accumulator exponent " + std::to_string(x.exp() + w.exp()));
  }
  check_accumulator_width(spec, w.bits(), x.bits(), b.bits(), s.bits());

  const std::size_t plane = g.out_h * g.out_w;
  std::vector<std::int64_t> acc(spec.out_ch * plane, 0);
  const auto& kt = kernels::active();
  accumulate<std::int64_t, std::int32_t, std::int32_t>(x.data(), w.data(), spec, g, acc,
                                                        kt.axpy_i64);
  std::vector<std::int32_t> out(acc.size());
  const std::int64_t lo = relu ? 0 : qmin(out_bits);
  const std::int64_t hi = qmax(out_bits);
  for (std::size_t oc = 0; oc < spec.out_ch; ++oc) {
    const std::int64_t bias = b[b.size() == 1 ? 0 : oc];
    const std::int64_t scale = s[s.size() == 1 ? 0 : oc];
    for (std::size_t i = 0; i < plane; ++i) {
      const std::int64_t m2 = (acc[oc * plane + i] + bias) * scale;
      out[oc * plane + i] = static_cast<std::int32_t>(std::clamp(rshift_round(m2, r), lo, hi));
    }
  }
  return QTensor({spec.out_ch, g.out_h, g.out_w}, std::move(out), out_bits,
                 x.exp() + w.exp() + s.exp() - r);
}

}  // namespace fadec
