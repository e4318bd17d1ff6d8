#include "fadec/numerics/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fadec/core/error.hpp"
#include "fadec/numerics/fixed_point.hpp"

namespace fadec {

void QuantParams::validate() const {
  for (int b : {weight_bits, bias_bits, scale_bits, act_bits}) {
    if (b < 2 || b > 32) throw ConfigError("bit width " + std::to_string(b) + " outside [2, 32]");
  }
  if (!(clip_rate > 0.0 && clip_rate <= 1.0)) {
    throw ConfigError("clip rate " + std::to_string(clip_rate) + " outside (0, 1]");
  }
}

QTensor quantize_tensor(const FTensor& t, int exp, int bits) {
  if (bits < 2 || bits > 32) throw ConfigError("bit width outside [2, 32]");
  std::vector<std::int32_t> q(t.size());
  constexpr double kSat = 9.0e18;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = t[i];
    if (!std::isfinite(v)) throw InvalidData("non-finite value at element " + std::to_string(i));
    const double r = std::clamp(std::round(std::ldexp(v, exp)), -kSat, kSat);
    q[i] = static_cast<std::int32_t>(clip(static_cast<std::int64_t>(r), bits));
  }
  return QTensor(t.shape(), std::move(q), bits, exp);
}

FTensor dequantize_tensor(const QTensor& t) {
  std::vector<float> f(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    f[i] = static_cast<float>(std::ldexp(static_cast<double>(t[i]), -t.exp()));
  }
  return FTensor(t.shape(), std::move(f));
}

QTensor requantize(const QTensor& t, int exp, int bits) {
  std::vector<std::int32_t> q(t.size());
  const int shift = exp - t.exp();
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::int64_t v = t[i];
    if (shift <= 0) {
      v = rshift_round(v, -shift);
    } else if (shift < 32) {
      v *= std::int64_t{1} << shift;  // |v| < 2^31, cannot leave 64 bits
    } else {
      v = v == 0 ? 0 : (v > 0 ? qmax(bits) : qmin(bits));
    }
    q[i] = static_cast<std::int32_t>(clip(v, bits));
  }
  return QTensor(t.shape(), std::move(q), bits, exp);
}

int fit_exponent(double v, int bits) {
  const double a = std::fabs(v);
  const double limit = static_cast<double>(qmax(bits)) + 0.5;
  int e = static_cast<int>(std::floor(std::log2(limit / a)));
  // log2 may be off by one at exact powers of two; settle with exact scaling.
  while (std::ldexp(a, e) >= limit) --e;
  while (std::ldexp(a, e + 1) < limit) ++e;
  return e;
}

int max_fit_exponent(const FTensor& t, int bits, int default_exp) {
  int best = std::numeric_limits<int>::max();
  for (float v : t.data()) {
    if (v != 0.0f) best = std::min(best, fit_exponent(v, bits));
  }
  return best == std::numeric_limits<int>::max() ? default_exp : best;
}

}  // namespace fadec
