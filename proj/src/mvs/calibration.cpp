#include "fadec/mvs/calibration.hpp"

#include <map>

#include <nlohmann/json.hpp>

#include "fadec/core/error.hpp"
#include "fadec/mvs/backend.hpp"
#include "fadec/mvs/pipeline.hpp"
#include "fadec/numerics/calibrate.hpp"

namespace fadec {

using nlohmann::json;

CalibrationResult calibrate_model(const Model& model, std::span<const Scene> scenes,
                                  QuantParams base) {
  base.validate();
  std::size_t frames = 0;
  for (const auto& s : scenes) frames += s.frames.size();
  if (frames == 0) throw UsageError("calibration set is empty");

  std::map<std::string, ExpHistogram> hist;
  FloatBackend b(&model, &hist, base.act_bits);
  for (const auto& s : scenes) run_sequence(b, model.config(), s.frames);

  CalibrationResult r;
  r.frames = frames;
  r.params = base;
  for (const auto& [site, h] : hist) {
    r.params.exps[site] = h.exponent(base.clip_rate, kDefaultActivationExp);
    if (h.all_zero()) r.zero_sites.push_back(site);
  }
  for (const auto& [name, c] : model.convs()) {
    r.params.exps["param/" + name + "/w"] = max_fit_exponent(c.w, base.weight_bits);
    r.params.exps["param/" + name + "/b"] = max_fit_exponent(c.b, base.bias_bits);
    r.params.exps["param/" + name + "/s"] = max_fit_exponent(c.s, base.scale_bits);
  }
  return r;
}

std::string quant_params_to_json(const QuantParams& p) {
  const json j = {{"format", "fadec-quant"},
                  {"weight_bits", p.weight_bits},
                  {"bias_bits", p.bias_bits},
                  {"scale_bits", p.scale_bits},
                  {"act_bits", p.act_bits},
                  {"clip_rate", p.clip_rate},
                  {"exps", p.exps}};
  return j.dump(2) + "\n";
}

QuantParams quant_params_from_json(std::string_view text) {
  QuantParams p;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "fadec-quant") throw ParseError("not a quantization manifest");
    p.weight_bits = j.value("weight_bits", p.weight_bits);
    p.bias_bits = j.value("bias_bits", p.bias_bits);
    p.scale_bits = j.value("scale_bits", p.scale_bits);
    p.act_bits = j.value("act_bits", p.act_bits);
    p.clip_rate = j.value("clip_rate", p.clip_rate);
    p.exps = j.value("exps", std::map<std::string, int>{});
  } catch (const json::exception& e) {
    throw ParseError(std::string("quantization manifest: ") + e.what());
  }
  p.validate();
  return p;
}

}  // namespace fadec
