#pragma once

#include <cstddef>

#include "fadec/core/tensor.hpp"

namespace fadec {

/// Convolution geometry. Only the (kernel, stride) pairs that occur in the
/// depth network are accepted: (1,1) (3,1) (3,2) (5,1) (5,2).
struct ConvSpec {
  int kernel = 1;
  int stride = 1;
  std::size_t in_ch = 1;
  std::size_t out_ch = 1;
  int padding = 0;

  /// Padding (kernel-1)/2: "same" output size at stride 1, ceil(in/2) at stride 2.
  static ConvSpec make(int kernel, int stride, std::size_t in_ch, std::size_t out_ch);

  /// Throws ConfigError for an unsupported (kernel, stride) pair or a
  /// non-positive channel count.
  void validate() const;

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

bool is_supported_conv(int kernel, int stride);

/// floor((in + 2 * padding - kernel) / stride) + 1; ShapeError if < 1.
std::size_t conv_output_extent(std::size_t in, const ConvSpec& spec);

/// y = (sum_{s,t} W_{s,t} x_{i+s,j+t} + b) * s on a CHW input.
///
/// w is (out_ch, in_ch, k, k); b and s hold one value per output channel or
/// a single shared value. Taps that fall into the zero padding contribute
/// nothing. Each output accumulates in (in_ch, ky, kx) order.
FTensor conv2d_float(const FTensor& x, const ConvSpec& spec, const FTensor& w, const FTensor& b,
                     const FTensor& s);

/// Integer form:
///   m1 = sum W^ x^ + b^   (64-bit accumulation)
///   m2 = m1 * s^
///   y^ = clip(rshift_round(m2, r), out_bits)
/// b must already sit at the accumulator exponent x.exp + w.exp. The output
/// exponent is x.exp + w.exp + s.exp - r. With `relu` the lower clip bound
/// becomes 0 (the activation folded into the output stage).
///
/// Throws ConfigError for r < 0, a misaligned bias, or a bit plan whose
/// worst case overflows the accumulator.
QTensor conv2d_quant(const QTensor& x, const ConvSpec& spec, const QTensor& w, const QTensor& b,
                     const QTensor& s, int r, int out_bits = 16, bool relu = false);

/// Worst-case |m2| for the bit plan must stay below 2^63. Throws ConfigError
/// otherwise.
void check_accumulator_width(const ConvSpec& spec, int weight_bits, int act_bits, int bias_bits,
                             int scale_bits);

}  // namespace fadec
