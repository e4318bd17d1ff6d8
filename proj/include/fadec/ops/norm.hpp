#pragma once

#include "fadec/core/tensor.hpp"

namespace fadec {

inline constexpr double kDefaultLayerNormEps = 1e-5;

/// (x - mean) / sqrt(var + eps) * gamma + beta, with mean and population
/// variance taken over every element of x. gamma/beta broadcast: a single
/// value, one value per leading-axis channel, or the full shape of x.
/// Two passes in double precision; a fixed summation order.
FTensor layer_norm(const FTensor& x, const FTensor& gamma, const FTensor& beta,
                   double eps = kDefaultLayerNormEps);

}  // namespace fadec
