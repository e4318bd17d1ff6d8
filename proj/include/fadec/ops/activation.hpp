#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fadec/core/tensor.hpp"

namespace fadec {

FTensor relu(const FTensor& x);
QTensor relu(const QTensor& x);

/// Exact activations, used by the float reference path.
double sigmoid(double x);
double elu(double x);
FTensor sigmoid(const FTensor& x);
FTensor elu(const FTensor& x);

enum class ActKind { kSigmoid, kElu };
std::string_view to_string(ActKind kind);
ActKind parse_act_kind(std::string_view name);

struct LutOptions {
  int in_exp = 12;       ///< exponent of quantized inputs
  int out_exp = 14;      ///< exponent of quantized outputs
  int out_bits = 16;
  bool sigmoid_half = false;  ///< store only [0, t] and mirror negative inputs
};

/// Lookup-table approximation of sigmoid or ELU over [-t, t].
///
/// The range is split into `entries` equal buckets; bucket i holds the
/// function sampled at its midpoint, quantized at out_exp. An input maps to
/// bucket floor((x + t) / width); inputs beyond +-t take the end bucket.
/// ELU's non-negative branch has no exponential and is passed through as
/// the identity on [0, t] instead of being tabulated.
class ActLut {
 public:
  ActLut(ActKind kind, std::size_t entries, double t, LutOptions opts);

  ActKind kind() const noexcept { return kind_; }
  std::size_t entries() const noexcept { return entries_; }
  double range() const noexcept { return t_; }
  int in_exp() const noexcept { return opts_.in_exp; }
  int out_exp() const noexcept { return opts_.out_exp; }
  int out_bits() const noexcept { return opts_.out_bits; }
  bool half() const noexcept { return opts_.sigmoid_half; }

  /// Exact function value sampled at each bucket midpoint (all buckets).
  const std::vector<double>& samples() const noexcept { return samples_; }
  /// Quantized entries as stored: `entries` values, or entries/2 for a
  /// half sigmoid table.
  const std::vector<std::int32_t>& stored() const noexcept { return stored_; }

  std::size_t bucket(double x) const;

  /// Quantized output for a real input, as a real value.
  double lookup(double x) const;

  /// Quantized output for an input integer at in_exp.
  std::int32_t apply(std::int32_t v) const;

  /// max |slope| * bucket width / 2 + one output quantization step.
  double error_bound() const;

 private:
  std::int32_t entry(std::size_t i) const;
  std::int32_t apply_real(double x) const;

  ActKind kind_;
  std::size_t entries_;
  double t_;
  LutOptions opts_;
  std::vector<double> samples_;
  std::vector<std::int32_t> stored_;
};

/// Throws ConfigError if entries < 2, t <= 0, or a half table is requested
/// for ELU or an odd entry count.
ActLut lut_build(ActKind kind, std::size_t entries = 256, double t = 8.0, LutOptions opts = {});

/// Per-element lookup. Throws ConfigError if x.exp() != lut.in_exp().
QTensor lut_apply(const ActLut& lut, const QTensor& x);

/// JSON header describing the table; the stored entries travel as a QTZ
/// tensor (bits = out_bits, exp = out_exp).
std::string lut_header_json(const ActLut& lut);
QTensor lut_table_tensor(const ActLut& lut);
/// Rebuilds a table from its header; throws ParseError if `table` does not
/// match the entries the header implies.
ActLut lut_from_parts(std::string_view header_json, const QTensor& table);

}  // namespace fadec
