#pragma once

#include <utility>

#include "fadec/core/tensor.hpp"

namespace fadec {

inline constexpr double kDefaultBnEps = 1e-5;

/// Absorb an inference-time batch norm into the preceding convolution.
///
/// conv_w is (out_ch, in_ch, k, k); conv_b and every BN vector have length
/// out_ch. Returns (W', b') with
///   W'_c = W_c * g_c,  b'_c = (b_c - mean_c) * g_c + beta_c,
///   g_c = gamma_c / sqrt(var_c + eps).
/// Throws ShapeError on a length mismatch and InvalidData on negative var.
std::pair<FTensor, FTensor> fold_batchnorm(const FTensor& conv_w, const FTensor& conv_b,
                                           const FTensor& bn_gamma, const FTensor& bn_beta,
                                           const FTensor& bn_mean, const FTensor& bn_var,
                                           double eps = kDefaultBnEps);

}  // namespace fadec
