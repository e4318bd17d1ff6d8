#include "fadec/mvs/model.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "fadec/core/error.hpp"
#include "fadec/core/rng.hpp"
#include "fadec/core/tensor_io.hpp"
#include "fadec/numerics/batchnorm.hpp"
#include "fadec/numerics/quantize.hpp"

namespace fadec {

using nlohmann::json;

// ---------------------------------------------------------- PipelineConfig

void PipelineConfig::validate() const {
  if (height == 0 || width == 0 || height % 32 != 0 || width % 32 != 0) {
    throw ConfigError("image size " + std::to_string(width) + "x" + std::to_string(height) +
                      " must be a positive multiple of 32 in both axes");
  }
  if (channels == 0) throw ConfigError("image channel count must be positive");
  if (hypotheses == 0) throw ConfigError("hypothesis count must be positive");
  if (measurement_frames == 0) throw ConfigError("measurement frame count must be positive");
  if (!(depth_min > 0) || !(depth_max > depth_min)) {
    throw ConfigError("depth range needs 0 < depth_min < depth_max");
  }
  if (keyframes.capacity == 0) throw ConfigError("keyframe capacity must be positive");
  if (keyframes.lambda < 0 || keyframes.threshold < 0) {
    throw ConfigError("keyframe lambda and threshold must be non-negative");
  }
}

std::string PipelineConfig::to_json() const {
  const json j = {{"height", height},
                  {"width", width},
                  {"channels", channels},
                  {"hypotheses", hypotheses},
                  {"measurement_frames", measurement_frames},
                  {"depth_min", depth_min},
                  {"depth_max", depth_max},
                  {"keyframes",
                   {{"capacity", keyframes.capacity},
                    {"lambda", keyframes.lambda},
                    {"threshold", keyframes.threshold}}}};
  return j.dump(2);
}

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

PipelineConfig config_from(const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + " must be an object");
  PipelineConfig c;
  read_field(j, "height", c.height, where);
  read_field(j, "width", c.width, where);
  read_field(j, "channels", c.channels, where);
  read_field(j, "hypotheses", c.hypotheses, where);
  read_field(j, "measurement_frames", c.measurement_frames, where);
  read_field(j, "depth_min", c.depth_min, where);
  read_field(j, "depth_max", c.depth_max, where);
  if (j.contains("keyframes")) {
    const auto& k = j.at("keyframes");
    if (!k.is_object()) throw ParseError(where + ": field 'keyframes' must be an object");
    read_field(k, "capacity", c.keyframes.capacity, where + ".keyframes");
    read_field(k, "lambda", c.keyframes.lambda, where + ".keyframes");
    read_field(k, "threshold", c.keyframes.threshold, where + ".keyframes");
  }
  c.validate();
  return c;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("pipeline config: ") + e.what());
  }
  return config_from(j, "pipeline config");
}

// ------------------------------------------------------------------- Model

Model::Model(PipelineConfig config, std::map<std::string, ConvLayer> convs,
             std::map<std::string, NormLayer> norms)
    : config_(std::move(config)), convs_(std::move(convs)), norms_(std::move(norms)) {
  for (const auto& [name, c] : convs_) {
    c.spec.validate();
    const auto k = static_cast<std::size_t>(c.spec.kernel);
    if (c.w.shape() != Shape{c.spec.out_ch, c.spec.in_ch, k, k} ||
        c.b.shape() != Shape{c.spec.out_ch} || c.s.shape() != Shape{c.spec.out_ch}) {
      throw ShapeError("conv layer " + name + " parameter shapes do not match its spec");
    }
  }
  for (const auto& [name, n] : norms_) {
    if (n.gamma.rank() != 1 || n.gamma.shape() != n.beta.shape()) {
      throw ShapeError("layer norm " + name + " needs 1-D gamma and beta of equal length");
    }
    if (!(n.eps >= 0)) throw ConfigError("layer norm " + name + " eps must be non-negative");
  }
}

const ConvLayer& Model::conv(std::string_view name) const {
  const auto it = convs_.find(std::string(name));
  if (it == convs_.end()) throw ConfigError("model has no conv layer '" + std::string(name) + "'");
  return it->second;
}

const NormLayer& Model::norm(std::string_view name) const {
  const auto it = norms_.find(std::string(name));
  if (it == norms_.end()) throw ConfigError("model has no layer norm '" + std::string(name) + "'");
  return it->second;
}

bool Model::has_conv(std::string_view name) const { return convs_.count(std::string(name)) != 0; }
bool Model::has_norm(std::string_view name) const { return norms_.count(std::string(name)) != 0; }

namespace {

FTensor random_tensor(Rng& rng, Shape shape, double lo, double hi) {
  std::vector<float> v(element_count(shape));
  for (auto& x : v) x = static_cast<float>(rng.uniform(lo, hi));
  return FTensor(std::move(shape), std::move(v));
}

FTensor normal_tensor(Rng& rng, Shape shape, double mean, double stddev) {
  std::vector<float> v(element_count(shape));
  for (auto& x : v) x = static_cast<float>(rng.normal(mean, stddev));
  return FTensor(std::move(shape), std::move(v));
}

}  // namespace

Model Model::random(const PipelineConfig& config, std::uint64_t seed) {
  const LayerPlan plan = plan_layers(config);
  const Rng root(seed);
  std::map<std::string, ConvLayer> convs;
  for (const auto& [name, spec] : plan.convs) {
    Rng rng = root.split(name);
    const auto k = static_cast<std::size_t>(spec.kernel);
    const double fan_in = static_cast<double>(spec.in_ch * k * k);
    const FTensor w = normal_tensor(rng, {spec.out_ch, spec.in_ch, k, k}, 0.0, std::sqrt(2.0 / fan_in));
    const FTensor b = normal_tensor(rng, {spec.out_ch}, 0.0, 0.05);
    const FTensor gamma = random_tensor(rng, {spec.out_ch}, 0.5, 1.0);
    const FTensor beta = normal_tensor(rng, {spec.out_ch}, 0.0, 0.05);
    const FTensor mean = normal_tensor(rng, {spec.out_ch}, 0.0, 0.05);
    const FTensor var = random_tensor(rng, {spec.out_ch}, 0.5, 1.5);
    auto [fw, fb] = fold_batchnorm(w, b, gamma, beta, mean, var, kDefaultBnEps);
    convs.emplace(name, ConvLayer{name, spec, std::move(fw), std::move(fb),
                                  random_tensor(rng, {spec.out_ch}, 0.5, 1.5)});
  }
  std::map<std::string, NormLayer> norms;
  for (const auto& [name, channels] : plan.norms) {
    Rng rng = root.split(name);
    norms.emplace(name, NormLayer{name, random_tensor(rng, {channels}, 0.8, 1.2),
                                  normal_tensor(rng, {channels}, 0.0, 0.1), 1e-5});
  }
  return Model(config, std::move(convs), std::move(norms));
}

void Model::save(const std::filesystem::path& dir) const {
  json convs = json::array();
  for (const auto& [name, c] : convs_) {
    const std::string base = "params/" + name;
    io::write_ftz(dir / (base + ".w.ftz"), c.w);
    io::write_ftz(dir / (base + ".b.ftz"), c.b);
    io::write_ftz(dir / (base + ".s.ftz"), c.s);
    convs.push_back({{"name", name},
                     {"kernel", c.spec.kernel},
                     {"stride", c.spec.stride},
                     {"in_ch", c.spec.in_ch},
                     {"out_ch", c.spec.out_ch},
                     {"padding", c.spec.padding},
                     {"w", base + ".w.ftz"},
                     {"b", base + ".b.ftz"},
                     {"s", base + ".s.ftz"},
                     {"exps",
                      {{"w", max_fit_exponent(c.w, 8)},
                       {"b", max_fit_exponent(c.b, 32)},
                       {"s", max_fit_exponent(c.s, 8)}}}});
  }
  json norms = json::array();
  for (const auto& [name, n] : norms_) {
    const std::string base = "params/" + name;
    io::write_ftz(dir / (base + ".gamma.ftz"), n.gamma);
    io::write_ftz(dir / (base + ".beta.ftz"), n.beta);
    norms.push_back({{"name", name},
                     {"eps", n.eps},
                     {"gamma", base + ".gamma.ftz"},
                     {"beta", base + ".beta.ftz"}});
  }
  const json manifest = {{"format", "fadec-model"},
                         {"version", 1},
                         {"config", json::parse(config_.to_json())},
                         {"convs", convs},
                         {"norms", norms}};
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Model Model::load(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    throw IoError("model manifest not found: " + manifest_path.string());
  }
  const std::string where = manifest_path.string();
  json j;
  try {
    j = json::parse(io::read_text(manifest_path));
  } catch (const json::parse_error& e) {
    throw ParseError(where + ": " + e.what());
  }
  const auto tensor = [&](const json& entry, const char* key) {
    if (!entry.contains(key) || !entry.at(key).is_string()) {
      throw ParseError(where + ": missing tensor path '" + key + "'");
    }
    const auto path = dir / entry.at(key).get<std::string>();
    if (!std::filesystem::exists(path)) throw IoError("parameter file not found: " + path.string());
    return io::read_ftz(path);
  };
  try {
    if (j.value("format", "") != "fadec-model") throw ParseError(where + ": not a model manifest");
    PipelineConfig config = config_from(j.value("config", json::object()), where + ": config");
    std::map<std::string, ConvLayer> convs;
    for (const auto& c : j.at("convs")) {
      ConvLayer layer;
      layer.name = c.at("name").get<std::string>();
      layer.spec = ConvSpec::make(c.at("kernel").get<int>(), c.at("stride").get<int>(),
                                  c.at("in_ch").get<std::size_t>(), c.at("out_ch").get<std::size_t>());
      layer.w = tensor(c, "w");
      layer.b = tensor(c, "b");
      layer.s = tensor(c, "s");
      convs.emplace(layer.name, std::move(layer));
    }
    std::map<std::string, NormLayer> norms;
    for (const auto& n : j.at("norms")) {
      NormLayer layer;
      layer.name = n.at("name").get<std::string>();
      layer.eps = n.value("eps", 1e-5);
      layer.gamma = tensor(n, "gamma");
      layer.beta = tensor(n, "beta");
      norms.emplace(layer.name, std::move(layer));
    }
    return Model(std::move(config), std::move(convs), std::move(norms));
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace fadec
