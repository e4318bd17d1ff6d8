#pragma once

#include <cstddef>
#include <span>

#include "fadec/core/tensor.hpp"

namespace fadec {

/// Joins tensors along `axis`. All other extents must agree (ShapeError).
FTensor concat(std::span<const FTensor> parts, std::size_t axis);

/// Quantized concat: each part is moved to out_exp (left shift or rounding
/// right shift) and clipped to out_bits.
QTensor concat(std::span<const QTensor> parts, std::size_t axis, int out_exp, int out_bits);

/// Quantized concat at the largest input exponent, reached by one left
/// shift per part. Width is the widest input.
QTensor concat(std::span<const QTensor> parts, std::size_t axis);

/// Elements [start, stop) along `axis`.
FTensor slice(const FTensor& x, std::size_t axis, std::size_t start, std::size_t stop);
QTensor slice(const QTensor& x, std::size_t axis, std::size_t start, std::size_t stop);

}  // namespace fadec
