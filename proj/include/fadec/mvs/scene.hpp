#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "fadec/core/tensor.hpp"
#include "fadec/mvs/geometry.hpp"
#include "fadec/mvs/model.hpp"

namespace fadec {

/// Ordered camera frames, optionally with ground-truth depth per frame.
struct Scene {
  std::vector<Frame> frames;
  std::vector<FTensor> depths;  ///< empty, or one 1 x H x W map per frame

  bool has_depth() const noexcept { return !depths.empty(); }
};

/// Focal length 0.8 * width, principal point at the image center.
Intrinsics default_intrinsics(const PipelineConfig& config);

/// Textured slanted plane seen by a camera translating 0.05-0.1 units per
/// frame with small rotations. Depth is exact ray-plane intersection depth.
Scene make_synthetic_scene(const PipelineConfig& config, std::size_t frames, std::uint64_t seed);

/// Images of i.i.d. N(mean, stddev^2) pixels on the same kind of camera
/// path; no ground truth. Used for calibration.
Scene make_noise_scene(const PipelineConfig& config, std::size_t frames, double mean,
                       double stddev, std::uint64_t seed);

/// Directory layout: frame_NNN.ftz (image), frame_NNN.json
/// {"pose": 16 row-major reals, "intrinsics": 9 row-major reals} and
/// optionally depth_NNN.ftz.
void save_scene(const Scene& scene, const std::filesystem::path& dir);

/// Throws IoError for a missing directory and ParseError naming the file and
/// field for a malformed sidecar.
Scene load_scene(const std::filesystem::path& dir);

}  // namespace fadec
