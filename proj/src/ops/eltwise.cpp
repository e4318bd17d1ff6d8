#include "fadec/ops/eltwise.hpp"

#include <algorithm>
#include <string>

#include "fadec/core/error.hpp"
#include "fadec/numerics/fixed_point.hpp"

namespace fadec {

std::string_view to_string(EltKind kind) { return kind == EltKind::kAdd ? "add" : "mul"; }

namespace {

void check_same_shape(const Shape& a, const Shape& b, std::string_view op) {
  if (a != b) {
    throw ShapeError(std::string(op) + " operands differ: " + to_string(a) + " vs " + to_string(b));
  }
}

template <typename F>
FTensor combine(const FTensor& a, const FTensor& b, std::string_view op, F f) {
  check_same_shape(a.shape(), b.shape(), op);
  std::vector<float> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a[i], b[i]);
  return FTensor(a.shape(), std::move(out));
}

}  // namespace

FTensor add(const FTensor& a, const FTensor& b) {
  return combine(a, b, "add", [](float x, float y) { return x + y; });
}

FTensor mul(const FTensor& a, const FTensor& b) {
  return combine(a, b, "mul", [](float x, float y) { return x * y; });
}

QTensor eltwise(EltKind kind, const QTensor& a, const QTensor& b, PreShift shift, int out_exp,
                int out_bits) {
  check_same_shape(a.shape(), b.shape(), to_string(kind));
  if (shift.a < 0 || shift.b < 0 || shift.a > 30 || shift.b > 30) {
    throw ConfigError("eltwise pre-shift must lie in [0, 30]");
  }
  const int ea = a.exp() + shift.a;
  const int eb = b.exp() + shift.b;
  int acc_exp = 0;
  if (kind == EltKind::kAdd) {
    if (ea != eb) {
      throw ConfigError("add operands at exponents " + std::to_string(ea) + " and " +
                        std::to_string(eb) + " after shifting");
    }
    acc_exp = ea;
  } else {
    acc_exp = ea + eb;
  }
  const int r = acc_exp - out_exp;
  if (r < 0) {
    throw ConfigError("eltwise output exponent " + std::to_string(out_exp) +
                      " exceeds intermediate exponent " + std::to_string(acc_exp));
  }
  std::vector<std::int32_t> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::int64_t x = std::int64_t{a[i]} * (std::int64_t{1} << shift.a);
    const std::int64_t y = std::int64_t{b[i]} * (std::int64_t{1} << shift.b);
    const std::int64_t m = kind == EltKind::kAdd ? x + y : x * y;
    out[i] = static_cast<std::int32_t>(clip(rshift_round(m, r), out_bits));
  }
  return QTensor(a.shape(), std::move(out), out_bits, out_exp);
}

PreShift align_for_add(const QTensor& a, const QTensor& b) {
  const int target = std::max(a.exp(), b.exp());
  return {target - a.exp(), target - b.exp()};
}

}  // namespace fadec
