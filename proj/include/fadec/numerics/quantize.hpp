#pragma once

#include <map>
#include <span>
#include <string>

#include "fadec/core/tensor.hpp"

namespace fadec {

/// Bit plan and per-tensor power-of-two exponents.
struct QuantParams {
  int weight_bits = 8;
  int bias_bits = 32;
  int scale_bits = 8;
  int act_bits = 16;
  double clip_rate = 0.95;
  /// Tensor id -> exponent; the multiplier of a tensor is 2^exp.
  std::map<std::string, int> exps;

  /// Throws ConfigError for widths outside [2, 32] or clip_rate outside (0, 1].
  void validate() const;
};

/// clip(round(v * 2^exp), bits) per element. Throws InvalidData on a
/// non-finite element; FTensor rejects those already, so this only fires
/// for data decoded through other paths.
QTensor quantize_tensor(const FTensor& t, int exp, int bits);

/// Each element becomes integer / 2^exp.
FTensor dequantize_tensor(const QTensor& t);

/// Same values re-expressed at another exponent and width, with rounding
/// and saturation.
QTensor requantize(const QTensor& t, int exp, int bits);

/// Largest exponent e with |round(|v| * 2^e)| <= 2^(bits-1)-1, i.e. the
/// largest e at which v is representable. Requires v != 0.
int fit_exponent(double v, int bits);

/// Largest exponent at which every element fits in `bits` bits. Returns
/// `default_exp` for an all-zero tensor.
int max_fit_exponent(const FTensor& t, int bits, int default_exp = 0);

}  // namespace fadec
