#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "fadec/core/tensor.hpp"
#include "fadec/mvs/model.hpp"
#include "fadec/numerics/calibrate.hpp"
#include "fadec/numerics/quantize.hpp"
#include "fadec/ops/activation.hpp"
#include "fadec/ops/resample.hpp"
#include "fadec/workload/op_graph.hpp"

namespace fadec {

/// A tensor flowing through the network. Which payload is populated depends
/// on the backend: `f` for float, `q` for quantized, neither for shape-only.
struct Value {
  Shape shape;
  FTensor f;
  QTensor q;
  /// Trace nodes that produced this value; empty for inputs.
  std::vector<int> producers;
};

/// Executes network operators. The network code is written once against
/// this interface and runs in float, fixed-point, or shape-only form.
///
/// Every operator is recorded into an optional trace graph under the
/// current process label, and is assigned a site key
/// "<process>/<class>/<n>" (n counts per process and class since
/// begin_frame). Quantized execution looks up activation exponents by
/// site key; calibration collects statistics under the same keys.
///
/// Layer parameters come from a Model. Without one, the backend records
/// the layer shapes it is asked for into a LayerPlan instead.
class Backend {
 public:
  explicit Backend(const Model* model);
  virtual ~Backend() = default;
  Backend(const Backend&) = delete;
  Backend& operator=(const Backend&) = delete;

  void set_trace(OpGraph* trace) noexcept { trace_ = trace; }
  void set_process(Process p) noexcept { process_ = p; }
  Process process() const noexcept { return process_; }
  /// Resets per-frame site counters.
  void begin_frame() { counters_.clear(); }
  const LayerPlan& plan() const noexcept { return plan_; }

  /// Brings external data into the network at site "input/<name>".
  virtual Value input(const FTensor& t, std::string_view name) = 0;
  /// Real-valued view of a value (zeros for shape-only execution).
  virtual FTensor to_float(const Value& v) const = 0;

  /// Convolution with optional ReLU. The ReLU is recorded as its own
  /// operator; fixed-point execution folds it into the output stage.
  Value conv(const Value& x, const std::string& name, int kernel, int stride,
             std::size_t out_ch, bool with_relu);
  Value relu(const Value& x);
  Value sigmoid(const Value& x);
  Value elu(const Value& x);
  Value add(const Value& a, const Value& b);
  Value mul(const Value& a, const Value& b);
  Value concat(std::span<const Value> parts);
  Value slice(const Value& x, std::size_t start, std::size_t stop);
  Value layer_norm(const Value& x, const std::string& name);
  Value upsample_nearest(const Value& x, std::size_t factor);
  Value upsample_bilinear(const Value& x, std::size_t factor);
  Value grid_sample(const Value& x, const Grid& g);
  /// Cost slice: elementwise product (recorded as mul) reduced over
  /// channels (recorded as add).
  Value correlate(const Value& current, const Value& warped);
  /// Joins 1 x H x W cost slices along channels. Bookkeeping only; not an
  /// operator of the census.
  Value stack(std::span<const Value> slices);

 protected:
  virtual Value do_conv(const Value& x, const ConvLayer& layer, bool with_relu,
                        const std::string& conv_site, const std::string& relu_site) = 0;
  virtual Value do_relu(const Value& x, const std::string& site) = 0;
  virtual Value do_act(ActKind kind, const Value& x, const std::string& site) = 0;
  virtual Value do_add(const Value& a, const Value& b, const std::string& site) = 0;
  virtual Value do_mul(const Value& a, const Value& b, const std::string& site) = 0;
  virtual Value do_concat(std::span<const Value> parts, const std::string& site) = 0;
  virtual Value do_slice(const Value& x, std::size_t start, std::size_t stop) = 0;
  virtual Value do_layer_norm(const Value& x, const NormLayer& layer, const std::string& site) = 0;
  virtual Value do_upsample_nearest(const Value& x, std::size_t factor) = 0;
  virtual Value do_upsample_bilinear(const Value& x, std::size_t factor,
                                     const std::string& site) = 0;
  virtual Value do_grid_sample(const Value& x, const Grid& g, const std::string& site) = 0;
  virtual Value do_correlate(const Value& a, const Value& b, const std::string& site) = 0;
  virtual Value do_stack(std::span<const Value> slices) = 0;

  std::string next_site(std::string_view cls);
  std::string input_site(std::string_view name) const;

 private:
  const ConvLayer& resolve_conv(const std::string& name, const ConvSpec& spec);
  const NormLayer& resolve_norm(const std::string& name, std::size_t channels);
  int record(OpKind kind, std::span<const Value* const> inputs, const Shape& output,
             std::optional<ConvSpec> spec = std::nullopt, std::string name = {});

  const Model* model_;
  LayerPlan plan_;
  std::map<std::string, ConvLayer> placeholder_convs_;
  std::map<std::string, NormLayer> placeholder_norms_;
  OpGraph* trace_ = nullptr;
  Process process_ = Process::kOther;
  std::map<std::string, int> counters_;
};

/// Real-valued reference execution. With a collector attached, every
/// operator output (and every input) is added to the histogram of its site.
class FloatBackend final : public Backend {
 public:
  explicit FloatBackend(const Model* model, std::map<std::string, ExpHistogram>* collector = nullptr,
                        int act_bits = 16);

  Value input(const FTensor& t, std::string_view name) override;
  FTensor to_float(const Value& v) const override { return v.f; }

 protected:
  Value do_conv(const Value& x, const ConvLayer& layer, bool with_relu,
                const std::string& conv_site, const std::string& relu_site) override;
  Value do_relu(const Value& x, const std::string& site) override;
  Value do_act(ActKind kind, const Value& x, const std::string& site) override;
  Value do_add(const Value& a, const Value& b, const std::string& site) override;
  Value do_mul(const Value& a, const Value& b, const std::string& site) override;
  Value do_concat(std::span<const Value> parts, const std::string& site) override;
  Value do_slice(const Value& x, std::size_t start, std::size_t stop) override;
  Value do_layer_norm(const Value& x, const NormLayer& layer, const std::string& site) override;
  Value do_upsample_nearest(const Value& x, std::size_t factor) override;
  Value do_upsample_bilinear(const Value& x, std::size_t factor, const std::string& site) override;
  Value do_grid_sample(const Value& x, const Grid& g, const std::string& site) override;
  Value do_correlate(const Value& a, const Value& b, const std::string& site) override;
  Value do_stack(std::span<const Value> slices) override;

 private:
  Value emit(FTensor t, const std::string& site);

  std::map<std::string, ExpHistogram>* collector_;
  int act_bits_;
};

/// Fixed-point execution with power-of-two exponents.
///
/// Convolutions, ReLU, LUT activations, add, mul, concat, slice and nearest
/// upsampling run on integers. Layer norm, bilinear upsampling, grid
/// sampling and the cost-slice reduction run in floating point on
/// dequantized inputs, and their results are re-quantized at the site's
/// calibrated exponent.
class QuantBackend final : public Backend {
 public:
  /// Throws ConfigError for an invalid bit plan.
  QuantBackend(const Model* model, QuantParams params);

  const QuantParams& params() const noexcept { return params_; }

  Value input(const FTensor& t, std::string_view name) override;
  FTensor to_float(const Value& v) const override;

 protected:
  Value do_conv(const Value& x, const ConvLayer& layer, bool with_relu,
                const std::string& conv_site, const std::string& relu_site) override;
  Value do_relu(const Value& x, const std::string& site) override;
  Value do_act(ActKind kind, const Value& x, const std::string& site) override;
  Value do_add(const Value& a, const Value& b, const std::string& site) override;
  Value do_mul(const Value& a, const Value& b, const std::string& site) override;
  Value do_concat(std::span<const Value> parts, const std::string& site) override;
  Value do_slice(const Value& x, std::size_t start, std::size_t stop) override;
  Value do_layer_norm(const Value& x, const NormLayer& layer, const std::string& site) override;
  Value do_upsample_nearest(const Value& x, std::size_t factor) override;
  Value do_upsample_bilinear(const Value& x, std::size_t factor, const std::string& site) override;
  Value do_grid_sample(const Value& x, const Grid& g, const std::string& site) override;
  Value do_correlate(const Value& a, const Value& b, const std::string& site) override;
  Value do_stack(std::span<const Value> slices) override;

 private:
  struct QuantConv {
    QTensor w;
    QTensor b;  ///< at its own exponent, bias_bits wide
    QTensor s;
  };

  int site_exp(const std::string& site) const;
  Value wrap(QTensor q) const;
  Value requant(const FTensor& t, const std::string& site) const;
  const QuantConv& quant_conv(const ConvLayer& layer);
  const ActLut& lut(ActKind kind, int in_exp, int out_exp);

  QuantParams params_;
  std::map<std::string, QuantConv> convs_;
  std::map<std::tuple<ActKind, int, int>, ActLut> luts_;
};

/// Shape propagation only; used to build operator graphs and layer plans.
class ShapeBackend final : public Backend {
 public:
  explicit ShapeBackend(const Model* model = nullptr) : Backend(model) {}

  Value input(const FTensor& t, std::string_view name) override;
  FTensor to_float(const Value& v) const override { return FTensor::zeros(v.shape); }

 protected:
  Value do_conv(const Value& x, const ConvLayer& layer, bool with_relu,
                const std::string& conv_site, const std::string& relu_site) override;
  Value do_relu(const Value& x, const std::string& site) override;
  Value do_act(ActKind kind, const Value& x, const std::string& site) override;
  Value do_add(const Value& a, const Value& b, const std::string& site) override;
  Value do_mul(const Value& a, const Value& b, const std::string& site) override;
  Value do_concat(std::span<const Value> parts, const std::string& site) override;
  Value do_slice(const Value& x, std::size_t start, std::size_t stop) override;
  Value do_layer_norm(const Value& x, const NormLayer& layer, const std::string& site) override;
  Value do_upsample_nearest(const Value& x, std::size_t factor) override;
  Value do_upsample_bilinear(const Value& x, std::size_t factor, const std::string& site) override;
  Value do_grid_sample(const Value& x, const Grid& g, const std::string& site) override;
  Value do_correlate(const Value& a, const Value& b, const std::string& site) override;
  Value do_stack(std::span<const Value> slices) override;
};

}  // namespace fadec
