#include "fadec/mvs/backend.hpp"

#include <algorithm>

#include "fadec/core/error.hpp"
#include "fadec/mvs/cost_volume.hpp"
#include "fadec/numerics/fixed_point.hpp"
#include "fadec/ops/conv.hpp"
#include "fadec/ops/eltwise.hpp"
#include "fadec/ops/layout.hpp"
#include "fadec/ops/norm.hpp"

namespace fadec {

// ---------------------------------------------------------------- Backend

Backend::Backend(const Model* model) : model_(model) {}

std::string Backend::next_site(std::string_view cls) {
  std::string prefix = std::string(to_string(process_)) + "/" + std::string(cls);
  const int n = counters_[prefix]++;
  return prefix + "/" + std::to_string(n);
}

std::string Backend::input_site(std::string_view name) const {
  return "input/" + std::string(name);
}

const ConvLayer& Backend::resolve_conv(const std::string& name, const ConvSpec& spec) {
  spec.validate();
  if (model_ != nullptr) {
    const ConvLayer& layer = model_->conv(name);
    if (!(layer.spec == spec)) {
      throw ConfigError("layer " + name + " parameters do not match the requested convolution");
    }
    return layer;
  }
  auto [it, inserted] = plan_.convs.emplace(name, spec);
  if (!inserted && !(it->second == spec)) {
    throw ConfigError("layer " + name + " requested with two different shapes");
  }
  auto& layer = placeholder_convs_[name];
  layer.name = name;
  layer.spec = spec;
  return layer;
}

const NormLayer& Backend::resolve_norm(const std::string& name, std::size_t channels) {
  if (model_ != nullptr) {
    const NormLayer& layer = model_->norm(name);
    if (layer.gamma.size() != channels) {
      throw ConfigError("layer norm " + name + " has " + std::to_string(layer.gamma.size()) +
                        " channels, input has " + std::to_string(channels));
    }
    return layer;
  }
  auto [it, inserted] = plan_.norms.emplace(name, channels);
  if (!inserted && it->second != channels) {
    throw ConfigError("layer norm " + name + " requested with two different widths");
  }
  auto& layer = placeholder_norms_[name];
  layer.name = name;
  return layer;
}

int Backend::record(OpKind kind, std::span<const Value* const> inputs, const Shape& output,
                    std::optional<ConvSpec> spec, std::string name) {
  if (trace_ == nullptr) return -1;
  OpDescriptor d;
  d.kind = kind;
  d.process = process_;
  for (const Value* v : inputs) d.inputs.push_back(v->shape);
  d.output = output;
  d.spec = spec;
  d.name = std::move(name);
  const int id = trace_->add_node(std::move(d));
  for (const Value* v : inputs) {
    for (int p : v->producers) trace_->add_edge(p, id);
  }
  return id;
}

namespace {
void set_producer(Value& v, int id) {
  v.producers.clear();
  if (id >= 0) v.producers.push_back(id);
}
}  // namespace

Value Backend::conv(const Value& x, const std::string& name, int kernel, int stride,
                    std::size_t out_ch, bool with_relu) {
  if (x.shape.size() != 3) throw ShapeError("conv input must be CHW, got " + to_string(x.shape));
  const ConvSpec spec = ConvSpec::make(kernel, stride, x.shape[0], out_ch);
  const ConvLayer& layer = resolve_conv(name, spec);
  const std::string conv_site = next_site(to_string(conv_kind(kernel, stride)));
  const std::string relu_site = with_relu ? next_site("relu") : std::string();
  Value y = do_conv(x, layer, with_relu, conv_site, relu_site);
  const Value* in[] = {&x};
  const int conv_id = record(conv_kind(kernel, stride), in, y.shape, spec, name);
  set_producer(y, conv_id);
  if (with_relu) {
    const Value* rin[] = {&y};
    set_producer(y, record(OpKind::kRelu, rin, y.shape));
  }
  return y;
}

Value Backend::relu(const Value& x) {
  Value y = do_relu(x, next_site("relu"));
  const Value* in[] = {&x};
  set_producer(y, record(OpKind::kRelu, in, y.shape));
  return y;
}

Value Backend::sigmoid(const Value& x) {
  Value y = do_act(ActKind::kSigmoid, x, next_site("sigmoid"));
  const Value* in[] = {&x};
  set_producer(y, record(OpKind::kSigmoid, in, y.shape));
  return y;
}

Value Backend::elu(const Value& x) {
  Value y = do_act(ActKind::kElu, x, next_site("elu"));
  const Value* in[] = {&x};
  set_producer(y, record(OpKind::kElu, in, y.shape));
  return y;
}

Value Backend::add(const Value& a, const Value& b) {
  if (a.shape != b.shape) {
    throw ShapeError("add operands differ: " + to_string(a.shape) + " vs " + to_string(b.shape));
  }
  Value y = do_add(a, b, next_site("add"));
  const Value* in[] = {&a, &b};
  set_producer(y, record(OpKind::kAdd, in, y.shape));
  return y;
}

Value Backend::mul(const Value& a, const Value& b) {
  if (a.shape != b.shape) {
    throw ShapeError("mul operands differ: " + to_string(a.shape) + " vs " + to_string(b.shape));
  }
  Value y = do_mul(a, b, next_site("mul"));
  const Value* in[] = {&a, &b};
  set_producer(y, record(OpKind::kMul, in, y.shape));
  return y;
}

Value Backend::concat(std::span<const Value> parts) {
  Value y = do_concat(parts, next_site("concat"));
  std::vector<const Value*> in;
  for (const auto& p : parts) in.push_back(&p);
  set_producer(y, record(OpKind::kConcat, in, y.shape));
  return y;
}

Value Backend::slice(const Value& x, std::size_t start, std::size_t stop) {
  next_site("slice");
  Value y = do_slice(x, start, stop);
  const Value* in[] = {&x};
  set_producer(y, record(OpKind::kSlice, in, y.shape));
  return y;
}

Value Backend::layer_norm(const Value& x, const std::string& name) {
  if (x.shape.empty()) throw ShapeError("layer norm of an empty value");
  const NormLayer& layer = resolve_norm(name, x.shape[0]);
  Value y = do_layer_norm(x, layer, next_site("layer_norm"));
  const Value* in[] = {&x};
  set_producer(y, record(OpKind::kLayerNorm, in, y.shape, std::nullopt, name));
  return y;
}

Value Backend::upsample_nearest(const Value& x, std::size_t factor) {
  next_site("upsample_nearest");
  Value y = do_upsample_nearest(x, factor);
  const Value* in[] = {&x};
  set_producer(y, record(OpKind::kUpsampleNearest, in, y.shape));
  return y;
}

Value Backend::upsample_bilinear(const Value& x, std::size_t factor) {
  Value y = do_upsample_bilinear(x, factor, next_site("upsample_bilinear"));
  const Value* in[] = {&x};
  set_producer(y, record(OpKind::kUpsampleBilinear, in, y.shape));
  return y;
}

Value Backend::grid_sample(const Value& x, const Grid& g) {
  Value y = do_grid_sample(x, g, next_site("grid_sample"));
  const Value* in[] = {&x};
  set_producer(y, record(OpKind::kGridSample, in, y.shape));
  return y;
}

Value Backend::correlate(const Value& current, const Value& warped) {
  if (current.shape.size() != 3 || current.shape != warped.shape) {
    throw ShapeError("correlate needs equal CHW features, got " + to_string(current.shape) +
                     " and " + to_string(warped.shape));
  }
  Value y = do_correlate(current, warped, next_site("cost"));
  const Value* in[] = {&current, &warped};
  const int mul_id = record(OpKind::kMul, in, current.shape);
  if (mul_id >= 0) {
    Value product;
    product.shape = current.shape;
    product.producers = {mul_id};
    const Value* rin[] = {&product};
    set_producer(y, record(OpKind::kAdd, rin, y.shape));
  }
  return y;
}

Value Backend::stack(std::span<const Value> slices) {
  if (slices.empty()) throw ShapeError("stack of no slices");
  Value y = do_stack(slices);
  y.producers.clear();
  for (const auto& s : slices) y.producers.insert(y.producers.end(), s.producers.begin(), s.producers.end());
  return y;
}

// ----------------------------------------------------------- FloatBackend

FloatBackend::FloatBackend(const Model* model, std::map<std::string, ExpHistogram>* collector,
                           int act_bits)
    : Backend(model), collector_(collector), act_bits_(act_bits) {}

Value FloatBackend::emit(FTensor t, const std::string& site) {
  if (collector_ != nullptr && !site.empty()) {
    collector_->try_emplace(site, act_bits_).first->second.add(t);
  }
  Value v;
  v.shape = t.shape();
  v.f = std::move(t);
  return v;
}

Value FloatBackend::input(const FTensor& t, std::string_view name) {
  return emit(t, input_site(name));
}

Value FloatBackend::do_conv(const Value& x, const ConvLayer& layer, bool with_relu,
                            const std::string& conv_site, const std::string& relu_site) {
  Value y = emit(conv2d_float(x.f, layer.spec, layer.w, layer.b, layer.s), conv_site);
  if (with_relu) y = emit(fadec::relu(y.f), relu_site);
  return y;
}

Value FloatBackend::do_relu(const Value& x, const std::string& site) {
  return emit(fadec::relu(x.f), site);
}

Value FloatBackend::do_act(ActKind kind, const Value& x, const std::string& site) {
  return emit(kind == ActKind::kSigmoid ? fadec::sigmoid(x.f) : fadec::elu(x.f), site);
}

Value FloatBackend::do_add(const Value& a, const Value& b, const std::string& site) {
  return emit(fadec::add(a.f, b.f), site);
}

Value FloatBackend::do_mul(const Value& a, const Value& b, const std::string& site) {
  return emit(fadec::mul(a.f, b.f), site);
}

Value FloatBackend::do_concat(std::span<const Value> parts, const std::string& site) {
  std::vector<FTensor> ts;
  for (const auto& p : parts) ts.push_back(p.f);
  return emit(fadec::concat(ts, 0), site);
}

Value FloatBackend::do_slice(const Value& x, std::size_t start, std::size_t stop) {
  return emit(fadec::slice(x.f, 0, start, stop), {});
}

Value FloatBackend::do_layer_norm(const Value& x, const NormLayer& layer, const std::string& site) {
  return emit(fadec::layer_norm(x.f, layer.gamma, layer.beta, layer.eps), site);
}

Value FloatBackend::do_upsample_nearest(const Value& x, std::size_t factor) {
  return emit(fadec::upsample_nearest(x.f, factor), {});
}

Value FloatBackend::do_upsample_bilinear(const Value& x, std::size_t factor,
                                         const std::string& site) {
  return emit(fadec::upsample_bilinear(x.f, factor), site);
}

Value FloatBackend::do_grid_sample(const Value& x, const Grid& g, const std::string& site) {
  return emit(fadec::grid_sample(x.f, g), site);
}

Value FloatBackend::do_correlate(const Value& a, const Value& b, const std::string& site) {
  return emit(fadec::correlate(a.f, b.f), site);
}

Value FloatBackend::do_stack(std::span<const Value> slices) {
  std::vector<FTensor> ts;
  for (const auto& s : slices) ts.push_back(s.f);
  return emit(fadec::concat(ts, 0), {});
}

// ----------------------------------------------------------- QuantBackend

QuantBackend::QuantBackend(const Model* model, QuantParams params)
    : Backend(model), params_(std::move(params)) {
  params_.validate();
}

int QuantBackend::site_exp(const std::string& site) const {
  const auto it = params_.exps.find(site);
  if (it == params_.exps.end()) {
    throw ConfigError("no calibrated exponent for site '" + site +
                      "'; calibrate on a sequence long enough to fill the keyframe buffer");
  }
  return it->second;
}

Value QuantBackend::wrap(QTensor q) const {
  Value v;
  v.shape = q.shape();
  v.q = std::move(q);
  return v;
}

Value QuantBackend::requant(const FTensor& t, const std::string& site) const {
  return wrap(quantize_tensor(t, site_exp(site), params_.act_bits));
}

Value QuantBackend::input(const FTensor& t, std::string_view name) {
  return requant(t, input_site(name));
}

FTensor QuantBackend::to_float(const Value& v) const { return dequantize_tensor(v.q); }

const QuantBackend::QuantConv& QuantBackend::quant_conv(const ConvLayer& layer) {
  auto it = convs_.find(layer.name);
  if (it != convs_.end()) return it->second;
  const auto exp_for = [&](const char* part, const FTensor& t, int bits) {
    const auto e = params_.exps.find("param/" + layer.name + "/" + part);
    return e != params_.exps.end() ? e->second : max_fit_exponent(t, bits, 0);
  };
  QuantConv qc{quantize_tensor(layer.w, exp_for("w", layer.w, params_.weight_bits), params_.weight_bits),
               quantize_tensor(layer.b, exp_for("b", layer.b, params_.bias_bits), params_.bias_bits),
               quantize_tensor(layer.s, exp_for("s", layer.s, params_.scale_bits), params_.scale_bits)};
  return convs_.emplace(layer.name, std::move(qc)).first->second;
}

const ActLut& QuantBackend::lut(ActKind kind, int in_exp, int out_exp) {
  const auto key = std::make_tuple(kind, in_exp, out_exp);
  auto it = luts_.find(key);
  if (it == luts_.end()) {
    LutOptions opts;
    opts.in_exp = in_exp;
    opts.out_exp = out_exp;
    opts.out_bits = params_.act_bits;
    it = luts_.emplace(key, lut_build(kind, 256, 8.0, opts)).first;
  }
  return it->second;
}

Value QuantBackend::do_conv(const Value& x, const ConvLayer& layer, bool with_relu,
                            const std::string& conv_site, const std::string& relu_site) {
  const QuantConv& qc = quant_conv(layer);
  const int acc_exp = x.q.exp() + qc.w.exp();
  std::vector<std::int32_t> bias(qc.b.size());
  for (std::size_t i = 0; i < bias.size(); ++i) {
    bias[i] = static_cast<std::int32_t>(clip(rescale(qc.b[i], qc.b.exp(), acc_exp), params_.bias_bits));
  }
  const QTensor b(qc.b.shape(), std::move(bias), params_.bias_bits, acc_exp);
  const int target = site_exp(with_relu ? relu_site : conv_site);
  const int r = std::max(0, acc_exp + qc.s.exp() - target);
  return wrap(conv2d_quant(x.q, layer.spec, qc.w, b, qc.s, r, params_.act_bits, with_relu));
}

Value QuantBackend::do_relu(const Value& x, const std::string&) { return wrap(fadec::relu(x.q)); }

Value QuantBackend::do_act(ActKind kind, const Value& x, const std::string& site) {
  return wrap(lut_apply(lut(kind, x.q.exp(), site_exp(site)), x.q));
}

Value QuantBackend::do_add(const Value& a, const Value& b, const std::string& site) {
  const PreShift shift = align_for_add(a.q, b.q);
  const int acc = std::max(a.q.exp(), b.q.exp());
  return wrap(eltwise(EltKind::kAdd, a.q, b.q, shift, std::min(site_exp(site), acc),
                      params_.act_bits));
}

Value QuantBackend::do_mul(const Value& a, const Value& b, const std::string& site) {
  const int acc = a.q.exp() + b.q.exp();
  return wrap(eltwise(EltKind::kMul, a.q, b.q, {}, std::min(site_exp(site), acc),
                      params_.act_bits));
}

Value QuantBackend::do_concat(std::span<const Value> parts, const std::string&) {
  std::vector<QTensor> qs;
  int exp = parts.front().q.exp();
  for (const auto& p : parts) {
    qs.push_back(p.q);
    exp = std::min(exp, p.q.exp());
  }
  return wrap(fadec::concat(qs, 0, exp, params_.act_bits));
}

Value QuantBackend::do_slice(const Value& x, std::size_t start, std::size_t stop) {
  return wrap(fadec::slice(x.q, 0, start, stop));
}

Value QuantBackend::do_layer_norm(const Value& x, const NormLayer& layer, const std::string& site) {
  return requant(fadec::layer_norm(dequantize_tensor(x.q), layer.gamma, layer.beta, layer.eps), site);
}

Value QuantBackend::do_upsample_nearest(const Value& x, std::size_t factor) {
  return wrap(fadec::upsample_nearest(x.q, factor));
}

Value QuantBackend::do_upsample_bilinear(const Value& x, std::size_t factor,
                                         const std::string& site) {
  return requant(fadec::upsample_bilinear(dequantize_tensor(x.q), factor), site);
}

Value QuantBackend::do_grid_sample(const Value& x, const Grid& g, const std::string& site) {
  return requant(fadec::grid_sample(dequantize_tensor(x.q), g), site);
}

Value QuantBackend::do_correlate(const Value& a, const Value& b, const std::string& site) {
  return requant(fadec::correlate(dequantize_tensor(a.q), dequantize_tensor(b.q)), site);
}

Value QuantBackend::do_stack(std::span<const Value> slices) {
  return do_concat(slices, {});
}

// ----------------------------------------------------------- ShapeBackend

namespace {

Value shaped(Shape s) {
  Value v;
  v.shape = std::move(s);
  return v;
}

Shape scaled(const Shape& s, std::size_t factor) {
  if (s.size() < 2) throw ShapeError("upsampling needs two spatial axes");
  if (factor == 0) throw ConfigError("upsampling factor must be positive");
  Shape out = s;
  out[s.size() - 2] *= factor;
  out[s.size() - 1] *= factor;
  return out;
}

Shape joined(std::span<const Value> parts) {
  if (parts.empty()) throw ShapeError("concat of no tensors");
  Shape out = parts[0].shape;
  out[0] = 0;
  for (const auto& p : parts) {
    if (p.shape.size() != out.size() ||
        !std::equal(p.shape.begin() + 1, p.shape.end(), out.begin() + 1)) {
      throw ShapeError("concat extents differ: " + to_string(parts[0].shape) + " vs " +
                       to_string(p.shape));
    }
    out[0] += p.shape[0];
  }
  return out;
}

}  // namespace

Value ShapeBackend::input(const FTensor& t, std::string_view) { return shaped(t.shape()); }

Value ShapeBackend::do_conv(const Value& x, const ConvLayer& layer, bool, const std::string&,
                            const std::string&) {
  return shaped({layer.spec.out_ch, conv_output_extent(x.shape[1], layer.spec),
                 conv_output_extent(x.shape[2], layer.spec)});
}

Value ShapeBackend::do_relu(const Value& x, const std::string&) { return shaped(x.shape); }

Value ShapeBackend::do_act(ActKind, const Value& x, const std::string&) { return shaped(x.shape); }

Value ShapeBackend::do_add(const Value& a, const Value&, const std::string&) {
  return shaped(a.shape);
}

Value ShapeBackend::do_mul(const Value& a, const Value&, const std::string&) {
  return shaped(a.shape);
}

Value ShapeBackend::do_concat(std::span<const Value> parts, const std::string&) {
  return shaped(joined(parts));
}

Value ShapeBackend::do_slice(const Value& x, std::size_t start, std::size_t stop) {
  if (x.shape.empty() || start >= stop || stop > x.shape[0]) {
    throw ShapeError("slice [" + std::to_string(start) + ", " + std::to_string(stop) +
                     ") invalid for " + to_string(x.shape));
  }
  Shape s = x.shape;
  s[0] = stop - start;
  return shaped(s);
}

Value ShapeBackend::do_layer_norm(const Value& x, const NormLayer&, const std::string&) {
  return shaped(x.shape);
}

Value ShapeBackend::do_upsample_nearest(const Value& x, std::size_t factor) {
  return shaped(scaled(x.shape, factor));
}

Value ShapeBackend::do_upsample_bilinear(const Value& x, std::size_t factor, const std::string&) {
  return shaped(scaled(x.shape, factor));
}

Value ShapeBackend::do_grid_sample(const Value& x, const Grid& g, const std::string&) {
  if (x.shape.size() != 3) throw ShapeError("grid_sample input must be CHW");
  return shaped({x.shape[0], g.height(), g.width()});
}

Value ShapeBackend::do_correlate(const Value& a, const Value&, const std::string&) {
  return shaped({1, a.shape[1], a.shape[2]});
}

Value ShapeBackend::do_stack(std::span<const Value> slices) { return shaped(joined(slices)); }

}  // namespace fadec
