#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fadec/core/tensor.hpp"
#include "fadec/mvs/backend.hpp"
#include "fadec/mvs/geometry.hpp"
#include "fadec/mvs/keyframe.hpp"
#include "fadec/mvs/model.hpp"
#include "fadec/workload/op_graph.hpp"

namespace fadec {

/// Recurrent state carried between frames. Both tensors are empty before the
/// first frame.
struct LSTMState {
  FTensor cell;
  FTensor hidden;

  bool empty() const noexcept { return hidden.empty(); }
};

/// Channels of the ConvLSTM state and of the stored keyframe feature.
inline constexpr std::size_t kHiddenChannels = 32;
inline constexpr std::size_t kFeatureChannels = 16;

/// Replaces the hidden state by its grid-sampled version; the cell is kept.
LSTMState hidden_state_warp(const LSTMState& state, const Grid& grid);

/// Parameters of one ConvLSTM cell: a 3x3 gate convolution producing
/// 4 * hidden channels (i, f, o, g) and the two layer norms.
struct ConvLstmWeights {
  ConvLayer gates;
  NormLayer ln_gates;
  NormLayer ln_cell;
};

/// One ConvLSTM step on the given backend:
///   z = LN(conv3x3(concat(input, h)))
///   i, f, o = sigmoid(z_i, z_f, z_o), g = ELU(z_g)
///   c' = f * c + i * g,  h' = o * ELU(LN(c'))
/// Layer names are "<prefix>.gates", "<prefix>.ln_gates", "<prefix>.ln_cell".
/// Returns (c', h').
std::pair<Value, Value> convlstm_cell(Backend& b, const Value& input, const Value& hidden,
                                      const Value& cell, const std::string& prefix = "CL");

/// Float step with standalone weights. Empty state tensors start from zero.
std::pair<LSTMState, FTensor> convlstm_step(const LSTMState& state, const FTensor& input,
                                            const ConvLstmWeights& weights);

/// Empty keyframe buffer sized for the configuration's stored feature.
KeyframeBuffer make_keyframe_buffer(const PipelineConfig& config);

struct FrameOutput {
  FTensor depth;          ///< 1 x H x W
  KeyframeBuffer kb;
  LSTMState state;
  bool fused = false;     ///< false when no keyframe was available
  std::size_t measurement_frames = 0;
};

/// One frame through FE, FS, keyframe store, CVF, CVE, hidden-state
/// correction, CL and CVD. Keyframes are selected before the current frame
/// is stored, so a frame never matches itself. Throws ShapeError when the
/// frame does not match the configuration.
FrameOutput forward_frame(Backend& b, const PipelineConfig& config, const Frame& frame,
                          const KeyframeBuffer& kb, const LSTMState& state,
                          const FTensor& prev_depth);

struct SequenceOutput {
  std::vector<FTensor> depths;
  std::vector<bool> fused;
};

/// Runs frames in order, carrying keyframes, state and depth.
SequenceOutput run_sequence(Backend& b, const PipelineConfig& config, std::span<const Frame> frames);

/// Operator graph of one steady-state frame (keyframe buffer holding
/// `measurement_frames` entries and a prior state), traced without data.
OpGraph trace_reference_frame(const PipelineConfig& config);

}  // namespace fadec
