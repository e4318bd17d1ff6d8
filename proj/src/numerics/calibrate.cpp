#include "fadec/numerics/calibrate.hpp"

#include <cmath>

#include "fadec/core/error.hpp"
#include "fadec/numerics/quantize.hpp"

namespace fadec {

void ExpHistogram::add(std::span<const float> values) {
  for (float v : values) {
    if (v == 0.0f) {
      ++zeros_;
    } else {
      ++nonzero_;
      ++fit_[fit_exponent(v, bits_)];
    }
  }
}

void ExpHistogram::merge(const ExpHistogram& other) {
  if (other.bits_ != bits_) throw ConfigError("merging histograms of different bit widths");
  zeros_ += other.zeros_;
  nonzero_ += other.nonzero_;
  for (auto [e, n] : other.fit_) fit_[e] += n;
}

int ExpHistogram::exponent(double clip_rate, int default_exp) const {
  if (!(clip_rate > 0.0 && clip_rate <= 1.0)) {
    throw ConfigError("clip rate " + std::to_string(clip_rate) + " outside (0, 1]");
  }
  if (all_zero()) return default_exp;
  const double n = static_cast<double>(total());
  auto needed = static_cast<std::uint64_t>(std::ceil(clip_rate * n - 1e-9 * n));
  if (needed == 0) needed = 1;
  if (zeros_ >= needed) return fit_.rbegin()->first;
  // Walk exponents downwards; an element fits at e iff its own fit exponent >= e.
  std::uint64_t fitting = zeros_;
  for (auto it = fit_.rbegin(); it != fit_.rend(); ++it) {
    fitting += it->second;
    if (fitting >= needed) return it->first;
  }
  return fit_.begin()->first;  // unreachable: all elements fit at the minimum
}

int calibrate_activation_exp(std::span<const FTensor> samples, int bits, double clip_rate,
                             int default_exp) {
  if (samples.empty()) throw UsageError("calibration needs at least one sample");
  ExpHistogram h(bits);
  for (const auto& s : samples) h.add(s);
  return h.exponent(clip_rate, default_exp);
}

}  // namespace fadec
