#pragma once

#include <string_view>

#include "fadec/core/tensor.hpp"

namespace fadec {

enum class EltKind { kAdd, kMul };
std::string_view to_string(EltKind kind);

/// Left shift applied to each operand before combining.
struct PreShift {
  int a = 0;
  int b = 0;
};

FTensor add(const FTensor& a, const FTensor& b);
FTensor mul(const FTensor& a, const FTensor& b);

/// Integer elementwise add or mul.
///
/// After the declared left shifts, add requires a.exp + shift.a to equal
/// b.exp + shift.b; mul produces exponent (a.exp + shift.a) + (b.exp + shift.b).
/// The 64-bit intermediate is brought to out_exp with rshift_round and
/// clipped to out_bits. Throws ConfigError when the exponents do not align,
/// a shift is negative or larger than 30, or out_exp exceeds the
/// intermediate exponent.
QTensor eltwise(EltKind kind, const QTensor& a, const QTensor& b, PreShift shift, int out_exp,
                int out_bits);

/// Shifts that raise the lower-exponent operand of an add to the other's
/// exponent.
PreShift align_for_add(const QTensor& a, const QTensor& b);

}  // namespace fadec
