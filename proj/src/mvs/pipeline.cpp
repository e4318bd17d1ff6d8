#include "fadec/mvs/pipeline.hpp"

#include <array>
#include <numeric>
#include <string>

#include "fadec/core/error.hpp"
#include "fadec/mvs/cost_volume.hpp"

namespace fadec {

namespace {

// Inverted-residual stages of the feature extractor.
struct Stage {
  const char* name;
  int kernel;
  int first_stride;
  std::size_t channels;
  int blocks;
  bool first_residual;
  bool residual;
};

constexpr std::array<Stage, 6> kStages = {{
    {"A", 3, 2, 12, 3, false, true},
    {"B", 5, 2, 16, 3, false, true},
    {"C", 5, 2, 24, 3, false, true},
    {"D", 3, 1, 32, 3, false, true},
    {"E", 5, 2, 32, 3, false, true},
    {"F", 5, 1, 32, 1, false, false},
}};

constexpr std::size_t kStemChannels = 16;
constexpr std::size_t kStemOut = 8;
constexpr std::size_t kMaxExpand = 32;
constexpr std::size_t kCveWidth0 = 24;
constexpr std::size_t kCveWidth = 32;
constexpr std::array<std::size_t, 4> kCvdWidths = {16, 16, 24, 32};  // by pyramid level

using Pyramid = std::array<Value, 5>;

Value block(Backend& b, const Value& x, const std::string& name, int kernel, int stride,
            std::size_t out, bool residual) {
  const std::size_t hid = std::min(2 * x.shape[0], kMaxExpand);
  Value y = b.conv(x, name + ".expand", 1, 1, hid, true);
  y = b.conv(y, name + ".dw", kernel, stride, hid, true);
  y = b.conv(y, name + ".project", 1, 1, out, false);
  return residual ? b.add(x, y) : y;
}

// Levels at 1/2, 1/4, 1/8, 1/16 and 1/32 of the input resolution.
Pyramid feature_extractor(Backend& b, const Value& image) {
  Pyramid p;
  Value x = b.conv(image, "FE.stem0", 3, 2, kStemChannels, true);
  x = b.conv(x, "FE.stem1", 3, 1, kStemChannels, true);
  x = b.conv(x, "FE.stem2", 1, 1, kStemOut, false);
  p[0] = x;
  for (const Stage& s : kStages) {
    for (int i = 0; i < s.blocks; ++i) {
      const bool first = i == 0;
      x = block(b, x, std::string("FE.") + s.name + std::to_string(i), s.kernel,
                first ? s.first_stride : 1, s.channels, first ? s.first_residual : s.residual);
    }
    const std::string_view n = s.name;
    if (n == "A") p[1] = x;
    if (n == "B") p[2] = x;
    if (n == "D") p[3] = x;
    if (n == "F") p[4] = x;
  }
  return p;
}

// Top-down merge; returns the smoothed features of the four finest levels.
std::array<Value, 4> feature_shrinker(Backend& b, const Pyramid& p) {
  std::array<Value, 5> lat;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    lat[i] = b.conv(p[i], "FS.lateral" + std::to_string(i), 1, 1, kFeatureChannels, false);
  }
  std::array<Value, 4> out;
  Value top = lat[4];
  for (int i = 3; i >= 0; --i) {
    top = b.add(lat[i], b.upsample_nearest(top, 2));
    out[i] = b.conv(top, "FS.smooth" + std::to_string(i), 3, 1, kFeatureChannels, false);
  }
  return out;
}

Value cost_volume(Backend& b, const PipelineConfig& cfg, const Frame& frame, const Value& feat,
                  const std::vector<Keyframe>& selected) {
  const auto hyps = DepthHypotheses::uniform_inverse(cfg.hypotheses, cfg.depth_min, cfg.depth_max);
  const std::size_t h = feat.shape[1], w = feat.shape[2];
  const Intrinsics k = scale_intrinsics(frame.intrinsics, static_cast<double>(cfg.height / h));
  std::vector<Value> sources;
  for (const auto& kf : selected) sources.push_back(b.input(kf.feature, "keyframe"));
  std::vector<Value> slices;
  slices.reserve(hyps.count());
  for (double depth : hyps.values) {
    if (sources.empty()) {
      slices.push_back(b.correlate(feat, feat));
      continue;
    }
    Value sum;
    for (std::size_t m = 0; m < sources.size(); ++m) {
      const Grid g = build_warp_grid(selected[m].pose, frame.pose, k, depth, h, w);
      Value warped = b.grid_sample(sources[m], g);
      sum = m == 0 ? std::move(warped) : b.add(sum, warped);
    }
    slices.push_back(b.correlate(feat, sum));
  }
  return b.stack(slices);
}

struct Encoded {
  Value bottom;
  std::array<Value, 4> skips;
};

Encoded cost_volume_encoder(Backend& b, const Value& cost, const std::array<Value, 4>& fs) {
  Encoded e;
  const std::array<Value, 2> in0 = {cost, fs[0]};
  Value x = b.concat(in0);
  for (int i = 0; i < 3; ++i) x = b.conv(x, "CVE.l0.conv" + std::to_string(i), 5, 1, kCveWidth0, true);
  e.skips[0] = x;
  x = b.conv(x, "CVE.l0.down", 5, 2, kCveWidth, true);
  for (int l = 1; l <= 3; ++l) {
    const std::string n = "CVE.l" + std::to_string(l);
    const std::array<Value, 2> in = {x, fs[l]};
    x = b.concat(in);
    for (int i = 0; i < 2; ++i) x = b.conv(x, n + ".conv" + std::to_string(i), 3, 1, kCveWidth, true);
    e.skips[l] = x;
    x = b.conv(x, n + ".down", 3, 2, kCveWidth, true);
  }
  for (int i = 0; i < 3; ++i) x = b.conv(x, "CVE.l4.conv" + std::to_string(i), 3, 1, kCveWidth, true);
  e.bottom = x;
  return e;
}

// Returns the half-resolution sigmoid map upsampled to full resolution.
Value cost_volume_decoder(Backend& b, const Value& hidden, const Encoded& e) {
  const std::array<Value, 2> in = {hidden, e.bottom};
  Value x = b.concat(in);
  x = b.relu(b.layer_norm(b.conv(x, "CVD.l4.conv0", 5, 1, kCveWidth, false), "CVD.l4.ln0"));
  x = b.conv(x, "CVD.l4.conv1", 3, 1, kCveWidth, true);
  Value d = b.sigmoid(b.conv(x, "CVD.l4.head", 3, 1, 1, false));
  for (int l = 3; l >= 0; --l) {
    const std::string n = "CVD.l" + std::to_string(l);
    const std::size_t w = kCvdWidths[l];
    const std::array<Value, 3> parts = {b.upsample_bilinear(x, 2), e.skips[l], b.upsample_bilinear(d, 2)};
    x = b.concat(parts);
    x = b.relu(b.layer_norm(b.conv(x, n + ".conv0", 5, 1, w, false), n + ".ln0"));
    x = b.relu(b.layer_norm(b.conv(x, n + ".conv1", 3, 1, w, false), n + ".ln1"));
    x = b.conv(x, n + ".conv2", 3, 1, w, true);
    d = b.sigmoid(b.conv(x, n + ".head", 3, 1, 1, false));
  }
  return b.upsample_bilinear(d, 2);
}

double mean(const FTensor& t) {
  double s = 0;
  for (float v : t.data()) s += v;
  return s / static_cast<double>(t.size());
}

void check_frame(const PipelineConfig& cfg, const Frame& frame) {
  const Shape want{cfg.channels, cfg.height, cfg.width};
  if (frame.image.shape() != want) {
    throw ShapeError("frame image " + to_string(frame.image.shape()) + ", configuration expects " +
                     to_string(want));
  }
}

}  // namespace

LSTMState hidden_state_warp(const LSTMState& state, const Grid& grid) {
  return {state.cell, grid_sample(state.hidden, grid)};
}

std::pair<Value, Value> convlstm_cell(Backend& b, const Value& input, const Value& hidden,
                                      const Value& cell, const std::string& prefix) {
  const std::size_t hid = hidden.shape.at(0);
  const std::array<Value, 2> in = {input, hidden};
  Value z = b.conv(b.concat(in), prefix + ".gates", 3, 1, 4 * hid, false);
  z = b.layer_norm(z, prefix + ".ln_gates");
  const Value i = b.sigmoid(b.slice(z, 0, hid));
  const Value f = b.sigmoid(b.slice(z, hid, 2 * hid));
  const Value o = b.sigmoid(b.slice(z, 2 * hid, 3 * hid));
  const Value g = b.elu(b.slice(z, 3 * hid, 4 * hid));
  const Value c_new = b.add(b.mul(f, cell), b.mul(i, g));
  const Value h_new = b.mul(o, b.elu(b.layer_norm(c_new, prefix + ".ln_cell")));
  return {c_new, h_new};
}

std::pair<LSTMState, FTensor> convlstm_step(const LSTMState& state, const FTensor& input,
                                            const ConvLstmWeights& weights) {
  if (input.rank() != 3) throw ShapeError("ConvLSTM input must be CHW");
  const std::size_t hid = weights.gates.spec.out_ch / 4;
  const Shape state_shape{hid, input.dim(1), input.dim(2)};
  const FTensor hidden = state.hidden.empty() ? FTensor::zeros(state_shape) : state.hidden;
  const FTensor cell = state.cell.empty() ? FTensor::zeros(state_shape) : state.cell;
  if (hidden.shape() != state_shape || cell.shape() != state_shape) {
    throw ShapeError("ConvLSTM state " + to_string(hidden.shape()) + " does not match " +
                     to_string(state_shape));
  }
  ConvLayer gates = weights.gates;
  gates.name = "cell.gates";
  NormLayer ln_gates = weights.ln_gates;
  ln_gates.name = "cell.ln_gates";
  NormLayer ln_cell = weights.ln_cell;
  ln_cell.name = "cell.ln_cell";
  const Model model({}, {{gates.name, gates}},
                    {{ln_gates.name, ln_gates}, {ln_cell.name, ln_cell}});
  FloatBackend b(&model);
  const auto [c, h] = convlstm_cell(b, b.input(input, "x"), b.input(hidden, "hidden"),
                                    b.input(cell, "cell"), "cell");
  return {LSTMState{c.f, h.f}, h.f};
}

KeyframeBuffer make_keyframe_buffer(const PipelineConfig& config) {
  return KeyframeBuffer(config.keyframes,
                        {kFeatureChannels, config.height / 2, config.width / 2});
}

FrameOutput forward_frame(Backend& b, const PipelineConfig& cfg, const Frame& frame,
                          const KeyframeBuffer& kb, const LSTMState& state,
                          const FTensor& prev_depth) {
  check_frame(cfg, frame);
  b.begin_frame();
  FrameOutput out{FTensor(), kb, {}, false, 0};

  b.set_process(Process::kFE);
  const Pyramid pyramid = feature_extractor(b, b.input(frame.image, "image"));

  b.set_process(Process::kFS);
  const std::array<Value, 4> fs = feature_shrinker(b, pyramid);

  // Select before storing so the current frame never matches itself.
  const std::vector<Keyframe> selected = kb.select_n(frame.pose, cfg.measurement_frames);
  const Keyframe* previous = kb.latest();
  out.kb.store(frame.pose, b.to_float(fs[0]));
  out.fused = !selected.empty();
  out.measurement_frames = selected.size();

  b.set_process(Process::kCVF);
  const Value cost = cost_volume(b, cfg, frame, fs[0], selected);

  b.set_process(Process::kCVE);
  const Encoded enc = cost_volume_encoder(b, cost, fs);

  b.set_process(Process::kOther);
  const Shape state_shape{kHiddenChannels, enc.bottom.shape[1], enc.bottom.shape[2]};
  Value hidden;
  if (state.empty()) {
    hidden = b.input(FTensor::zeros(state_shape), "hidden");
  } else {
    if (state.hidden.shape() != state_shape || state.cell.shape() != state_shape) {
      throw ShapeError("carried state " + to_string(state.hidden.shape()) + " does not match " +
                       to_string(state_shape));
    }
    hidden = b.input(state.hidden, "hidden");
    if (previous != nullptr && !prev_depth.empty()) {
      const Intrinsics k = scale_intrinsics(frame.intrinsics,
                                            static_cast<double>(cfg.height / state_shape[1]));
      const Grid g = build_warp_grid(previous->pose, frame.pose, k, mean(prev_depth),
                                     state_shape[1], state_shape[2]);
      hidden = b.grid_sample(hidden, g);
    }
  }

  b.set_process(Process::kCL);
  const Value cell = b.input(state.empty() ? FTensor::zeros(state_shape) : state.cell, "cell");
  const auto [c_new, h_new] = convlstm_cell(b, enc.bottom, hidden, cell);

  b.set_process(Process::kCVD);
  const Value s = cost_volume_decoder(b, h_new, enc);

  b.set_process(Process::kOther);
  out.depth = depth_from_sigmoid(b.to_float(s), cfg.depth_min, cfg.depth_max);
  out.state = {b.to_float(c_new), b.to_float(h_new)};
  return out;
}

SequenceOutput run_sequence(Backend& b, const PipelineConfig& config, std::span<const Frame> frames) {
  SequenceOutput out;
  KeyframeBuffer kb = make_keyframe_buffer(config);
  LSTMState state;
  FTensor depth;
  for (const Frame& f : frames) {
    FrameOutput r = forward_frame(b, config, f, kb, state, depth);
    kb = std::move(r.kb);
    state = std::move(r.state);
    depth = r.depth;
    out.depths.push_back(std::move(r.depth));
    out.fused.push_back(r.fused);
  }
  return out;
}

namespace {

// Keyframes at small offsets from the identity pose, all within the
// selection threshold.
Frame reference_frame(const PipelineConfig& cfg) {
  Frame f;
  f.image = FTensor::zeros({cfg.channels, cfg.height, cfg.width});
  f.intrinsics = Intrinsics::simple(static_cast<double>(cfg.width) * 0.8,
                                    static_cast<double>(cfg.width) / 2 - 0.5,
                                    static_cast<double>(cfg.height) / 2 - 0.5);
  return f;
}

KeyframeBuffer reference_buffer(const PipelineConfig& cfg) {
  KeyframeBuffer kb = make_keyframe_buffer(cfg);
  const FTensor feat = FTensor::zeros({kFeatureChannels, cfg.height / 2, cfg.width / 2});
  for (std::size_t m = 0; m < cfg.measurement_frames; ++m) {
    const double step = 0.05 * static_cast<double>(m + 1);
    kb.store(Pose::from_rt(Eigen::Matrix3d::Identity(), Eigen::Vector3d(step, 0, 0)), feat);
  }
  return kb;
}

LSTMState reference_state(const PipelineConfig& cfg) {
  const Shape s{kHiddenChannels, cfg.height / 32, cfg.width / 32};
  return {FTensor::zeros(s), FTensor::zeros(s)};
}

}  // namespace

OpGraph trace_reference_frame(const PipelineConfig& config) {
  config.validate();
  OpGraph g;
  ShapeBackend b;
  b.set_trace(&g);
  forward_frame(b, config, reference_frame(config), reference_buffer(config),
                reference_state(config), FTensor::filled({1, config.height, config.width}, 2.0f));
  return g;
}

LayerPlan plan_layers(const PipelineConfig& config) {
  config.validate();
  ShapeBackend b;
  forward_frame(b, config, reference_frame(config), reference_buffer(config),
                reference_state(config), FTensor::filled({1, config.height, config.width}, 2.0f));
  return b.plan();
}

}  // namespace fadec
