#pragma once

#include <cstdint>
#include <map>
#include <span>

#include "fadec/core/tensor.hpp"

namespace fadec {

/// Exponent returned when every calibration sample is zero.
inline constexpr int kDefaultActivationExp = 0;

/// Streaming summary of activation samples for one tensor site: how many
/// elements become unrepresentable at each exponent. Lets calibration run
/// over many frames without keeping the activations themselves.
class ExpHistogram {
 public:
  explicit ExpHistogram(int bits = 16) : bits_(bits) {}

  void add(std::span<const float> values);
  void add(const FTensor& t) { add(t.data()); }
  void merge(const ExpHistogram& other);

  int bits() const noexcept { return bits_; }
  std::uint64_t total() const noexcept { return zeros_ + nonzero_; }
  bool all_zero() const noexcept { return nonzero_ == 0; }

  /// Largest exponent e such that at least `clip_rate` of all recorded
  /// elements satisfy |round(v * 2^e)| <= 2^(bits-1)-1.
  ///
  /// When zeros alone meet the rate the rule admits any exponent; the
  /// result is then capped at the largest exponent at which some non-zero
  /// sample still fits. All-zero input yields `default_exp`.
  int exponent(double clip_rate, int default_exp = kDefaultActivationExp) const;

 private:
  int bits_;
  std::uint64_t zeros_ = 0;
  std::uint64_t nonzero_ = 0;
  std::map<int, std::uint64_t> fit_;  // per-element largest fitting exponent
};

/// Pooled calibration over all elements of all samples. Throws UsageError
/// on an empty sample list and ConfigError for clip_rate outside (0, 1].
int calibrate_activation_exp(std::span<const FTensor> samples, int bits, double clip_rate,
                             int default_exp = kDefaultActivationExp);

}  // namespace fadec
