#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fadec/mvs/model.hpp"
#include "fadec/mvs/scene.hpp"
#include "fadec/numerics/quantize.hpp"

namespace fadec {

struct CalibrationResult {
  QuantParams params;
  /// Sites whose samples were all zero and received the default exponent.
  std::vector<std::string> zero_sites;
  std::size_t frames = 0;
};

/// Runs the float pipeline over every scene, pools activations per site and
/// fills `base.exps` with one exponent per site (at base.act_bits and
/// base.clip_rate) plus "param/<layer>/{w,b,s}" for every convolution.
/// Throws UsageError when no frames are given.
CalibrationResult calibrate_model(const Model& model, std::span<const Scene> scenes,
                                  QuantParams base = {});

std::string quant_params_to_json(const QuantParams& p);
/// Throws ParseError for malformed input and ConfigError for an invalid plan.
QuantParams quant_params_from_json(std::string_view text);

}  // namespace fadec
