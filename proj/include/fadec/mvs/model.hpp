#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "fadec/core/tensor.hpp"
#include "fadec/mvs/keyframe.hpp"
#include "fadec/ops/conv.hpp"

namespace fadec {

/// Desk-scale pipeline configuration. Height and width must be multiples of
/// 32 (five stride-2 stages).
struct PipelineConfig {
  std::size_t height = 64;
  std::size_t width = 96;
  std::size_t channels = 3;
  std::size_t hypotheses = 64;
  std::size_t measurement_frames = 2;
  double depth_min = 0.5;
  double depth_max = 8.0;
  KeyframeOptions keyframes;

  void validate() const;
  std::string to_json() const;
  /// Missing keys keep their defaults. Throws ParseError for wrong types and
  /// ConfigError for invalid values.
  static PipelineConfig from_json(std::string_view text);
};

/// Convolution parameters in the y = (W * x + b) * s form.
struct ConvLayer {
  std::string name;
  ConvSpec spec;
  FTensor w;  ///< out_ch x in_ch x k x k
  FTensor b;  ///< out_ch
  FTensor s;  ///< out_ch
};

struct NormLayer {
  std::string name;
  FTensor gamma;  ///< one value per leading channel
  FTensor beta;
  double eps = 1e-5;
};

/// Layer shapes requested by one pass of the network.
struct LayerPlan {
  std::map<std::string, ConvSpec> convs;
  std::map<std::string, std::size_t> norms;  ///< name -> channel count
};

/// Every parameter of the depth network, keyed by layer name.
class Model {
 public:
  Model() = default;
  Model(PipelineConfig config, std::map<std::string, ConvLayer> convs,
        std::map<std::string, NormLayer> norms);

  const PipelineConfig& config() const noexcept { return config_; }
  const std::map<std::string, ConvLayer>& convs() const noexcept { return convs_; }
  const std::map<std::string, NormLayer>& norms() const noexcept { return norms_; }

  /// Throws ConfigError for an unknown name.
  const ConvLayer& conv(std::string_view name) const;
  const NormLayer& norm(std::string_view name) const;
  bool has_conv(std::string_view name) const;
  bool has_norm(std::string_view name) const;

  /// Seeded random parameters: He-initialized convolutions with random
  /// batch-norm statistics folded in, per-channel output scales in
  /// [0.5, 1.5], and layer-norm affine terms near (1, 0).
  static Model random(const PipelineConfig& config, std::uint64_t seed);

  /// Writes manifest.json plus one FTZ file per parameter tensor.
  void save(const std::filesystem::path& dir) const;
  /// Throws IoError when the manifest or a tensor file is missing and
  /// ParseError when the manifest is malformed.
  static Model load(const std::filesystem::path& dir);

 private:
  PipelineConfig config_;
  std::map<std::string, ConvLayer> convs_;
  std::map<std::string, NormLayer> norms_;
};

/// Shapes of every layer the network instantiates for `config`.
LayerPlan plan_layers(const PipelineConfig& config);

}  // namespace fadec
