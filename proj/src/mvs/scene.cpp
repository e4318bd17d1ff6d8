#include "fadec/mvs/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "fadec/core/error.hpp"
#include "fadec/core/rng.hpp"
#include "fadec/core/tensor_io.hpp"

namespace fadec {

using nlohmann::json;

Intrinsics default_intrinsics(const PipelineConfig& config) {
  return Intrinsics::simple(0.8 * static_cast<double>(config.width),
                            static_cast<double>(config.width) / 2 - 0.5,
                            static_cast<double>(config.height) / 2 - 0.5);
}

namespace {

std::vector<Pose> camera_path(Rng rng, std::size_t frames) {
  const double heading = rng.uniform(0.0, 2.0 * M_PI);
  const Eigen::Vector3d dir(std::cos(heading), std::sin(heading), rng.uniform(-0.2, 0.2));
  const Eigen::Vector3d axis = Eigen::Vector3d(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1)).normalized();
  const double turn = rng.uniform(0.005, 0.02);
  std::vector<Pose> poses;
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < frames; ++i) {
    const Eigen::Matrix3d r = Eigen::AngleAxisd(turn * static_cast<double>(i), axis).toRotationMatrix();
    poses.push_back(Pose::from_rt(r, t));
    t += dir.normalized() * rng.uniform(0.05, 0.1);
  }
  return poses;
}

struct Texture {
  std::array<double, 3> fu{}, fv{}, pu{}, pv{};

  explicit Texture(Rng& rng) {
    for (int c = 0; c < 3; ++c) {
      fu[c] = rng.uniform(2.0, 9.0);
      fv[c] = rng.uniform(2.0, 9.0);
      pu[c] = rng.uniform(0.0, 2.0 * M_PI);
      pv[c] = rng.uniform(0.0, 2.0 * M_PI);
    }
  }

  double operator()(int c, double u, double v) const {
    const double checker = (static_cast<long>(std::floor(u * 2)) + static_cast<long>(std::floor(v * 2))) % 2 == 0 ? 0.1 : -0.1;
    return 0.5 + 0.2 * std::sin(fu[c] * u + pu[c]) + 0.2 * std::cos(fv[c] * v + pv[c]) + checker;
  }
};

}  // namespace

Scene make_synthetic_scene(const PipelineConfig& config, std::size_t frames, std::uint64_t seed) {
  config.validate();
  const Rng root(seed);
  Rng geo = root.split("plane");
  const Eigen::Vector3d p0(0, 0, geo.uniform(2.5, 4.0));
  const Eigen::Vector3d n = Eigen::Vector3d(geo.uniform(-0.3, 0.3), geo.uniform(-0.3, 0.3), -1.0).normalized();
  // Orthonormal basis of the plane for texture coordinates.
  const Eigen::Vector3d e1 = n.unitOrthogonal();
  const Eigen::Vector3d e2 = n.cross(e1);
  Rng tex_rng = root.split("texture");
  const Texture tex(tex_rng);
  const Intrinsics k = default_intrinsics(config);
  const Eigen::Matrix3d k_inv = k.matrix().inverse();

  Scene scene;
  const auto poses = camera_path(root.split("path"), frames);
  const std::size_t h = config.height, w = config.width, plane = h * w;
  for (const Pose& pose : poses) {
    std::vector<float> img(config.channels * plane);
    std::vector<float> depth(plane);
    const Eigen::Matrix3d r = pose.rotation();
    const Eigen::Vector3d t = pose.translation();
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const Eigen::Vector3d ray_cam = k_inv * Eigen::Vector3d(static_cast<double>(x), static_cast<double>(y), 1.0);
        const Eigen::Vector3d ray = r * ray_cam;
        const double denom = n.dot(ray);
        double z = config.depth_max;
        double u = 0, v = 0;
        if (std::abs(denom) > 1e-9) {
          const double lambda = n.dot(p0 - t) / denom;
          if (lambda > 0) {
            z = lambda * ray_cam.z();
            const Eigen::Vector3d hit = t + lambda * ray - p0;
            u = hit.dot(e1);
            v = hit.dot(e2);
          }
        }
        depth[y * w + x] = static_cast<float>(std::clamp(z, config.depth_min, config.depth_max));
        for (std::size_t c = 0; c < config.channels; ++c) {
          img[c * plane + y * w + x] = static_cast<float>(tex(static_cast<int>(c % 3), u, v));
        }
      }
    }
    scene.frames.push_back({FTensor({config.channels, h, w}, std::move(img)), pose, k});
    scene.depths.emplace_back(Shape{1, h, w}, std::move(depth));
  }
  return scene;
}

Scene make_noise_scene(const PipelineConfig& config, std::size_t frames, double mean,
                       double stddev, std::uint64_t seed) {
  config.validate();
  if (!(stddev >= 0)) throw ConfigError("calibration image stddev must be non-negative");
  const Rng root(seed);
  Rng pix = root.split("pixels");
  Scene scene;
  const Intrinsics k = default_intrinsics(config);
  for (const Pose& pose : camera_path(root.split("path"), frames)) {
    std::vector<float> img(config.channels * config.height * config.width);
    for (auto& v : img) v = static_cast<float>(stddev > 0 ? pix.normal(mean, stddev) : mean);
    scene.frames.push_back({FTensor({config.channels, config.height, config.width}, std::move(img)), pose, k});
  }
  return scene;
}

namespace {

std::string indexed(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu%s", stem, i, ext);
  return buf;
}

std::vector<double> numbers(const json& j, const char* field, std::size_t count,
                            const std::string& file) {
  if (!j.contains(field)) throw ParseError(file + ": missing field '" + field + "'");
  const auto& a = j.at(field);
  if (!a.is_array() || a.size() != count) {
    throw ParseError(file + ": field '" + field + "' must be an array of " +
                     std::to_string(count) + " numbers");
  }
  std::vector<double> out;
  for (const auto& v : a) {
    if (!v.is_number()) throw ParseError(file + ": field '" + field + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

void save_scene(const Scene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    const Frame& f = scene.frames[i];
    io::write_ftz(dir / indexed("frame", i, ".ftz"), f.image);
    const auto p = f.pose.row_major();
    const auto k = f.intrinsics.row_major();
    const json side = {{"pose", std::vector<double>(p.begin(), p.end())},
                       {"intrinsics", std::vector<double>(k.begin(), k.end())}};
    io::write_text(dir / indexed("frame", i, ".json"), side.dump(2) + "\n");
    if (scene.has_depth()) io::write_ftz(dir / indexed("depth", i, ".ftz"), scene.depths.at(i));
  }
}

Scene load_scene(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("scene directory not found: " + dir.string());
  Scene scene;
  for (std::size_t i = 0;; ++i) {
    const auto image_path = dir / indexed("frame", i, ".ftz");
    if (!std::filesystem::exists(image_path)) break;
    const auto side_path = dir / indexed("frame", i, ".json");
    if (!std::filesystem::exists(side_path)) throw IoError("pose sidecar not found: " + side_path.string());
    const std::string file = side_path.string();
    json side;
    try {
      side = json::parse(io::read_text(side_path));
    } catch (const json::parse_error& e) {
      throw ParseError(file + ": " + e.what());
    }
    if (!side.is_object()) throw ParseError(file + ": sidecar must be an object");
    Frame f;
    f.image = io::read_ftz(image_path);
    try {
      f.pose = Pose::from_row_major(numbers(side, "pose", 16, file));
    } catch (const InvalidData& e) {
      throw ParseError(file + ": field 'pose': " + e.what());
    }
    try {
      f.intrinsics = Intrinsics::from_row_major(numbers(side, "intrinsics", 9, file));
    } catch (const InvalidData& e) {
      throw ParseError(file + ": field 'intrinsics': " + e.what());
    }
    scene.frames.push_back(std::move(f));
    const auto depth_path = dir / indexed("depth", i, ".ftz");
    if (std::filesystem::exists(depth_path)) scene.depths.push_back(io::read_ftz(depth_path));
  }
  if (scene.frames.empty()) throw IoError("no frames (frame_000.ftz) in " + dir.string());
  if (!scene.depths.empty() && scene.depths.size() != scene.frames.size()) {
    throw ParseError(dir.string() + ": depth maps present for only some frames");
  }
  return scene;
}

}  // namespace fadec
