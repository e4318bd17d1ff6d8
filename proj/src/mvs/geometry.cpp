#include "fadec/mvs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/LU>

#include "fadec/core/error.hpp"

namespace fadec {

namespace {
constexpr double kOrthoTol = 1e-4;
constexpr double kMinDepth = 1e-6;
}  // namespace

Pose::Pose(const Eigen::Matrix4d& m) : m_(m) {
  if (!m_.allFinite()) throw InvalidData("pose has non-finite entries");
  if (std::abs(m_(3, 0)) > 0 || std::abs(m_(3, 1)) > 0 || std::abs(m_(3, 2)) > 0 ||
      m_(3, 3) != 1.0) {
    throw InvalidData("pose bottom row must be (0, 0, 0, 1)");
  }
  const Eigen::Matrix3d r = rotation();
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > kOrthoTol || r.determinant() < 0) {
    throw InvalidData("pose rotation block is not orthonormal");
  }
}

Pose Pose::from_rt(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return Pose(m);
}

Pose Pose::from_row_major(std::span<const double> v) {
  if (v.size() != 16) throw InvalidData("pose needs 16 values, got " + std::to_string(v.size()));
  Eigen::Matrix4d m;
  for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = v[i];
  return Pose(m);
}

Pose Pose::inverse() const {
  const Eigen::Matrix3d rt = rotation().transpose();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rt;
  m.topRightCorner<3, 1>() = -rt * translation();
  Pose p;
  p.m_ = m;
  return p;
}

std::array<double, 16> Pose::row_major() const {
  std::array<double, 16> v{};
  for (int i = 0; i < 16; ++i) v[i] = m_(i / 4, i % 4);
  return v;
}

Intrinsics::Intrinsics(const Eigen::Matrix3d& k) : k_(k) {
  if (!k_.allFinite()) throw InvalidData("intrinsics have non-finite entries");
  if (k_(1, 0) != 0 || k_(2, 0) != 0 || k_(2, 1) != 0) {
    throw InvalidData("intrinsics must be upper-triangular");
  }
  if (k_(0, 0) <= 0 || k_(1, 1) <= 0) throw InvalidData("intrinsics focal terms must be positive");
  if (k_(2, 2) != 1.0) throw InvalidData("intrinsics K(2,2) must be 1");
}

Intrinsics Intrinsics::from_row_major(std::span<const double> v) {
  if (v.size() != 9) {
    throw InvalidData("intrinsics need 9 values, got " + std::to_string(v.size()));
  }
  Eigen::Matrix3d k;
  for (int i = 0; i < 9; ++i) k(i / 3, i % 3) = v[i];
  return Intrinsics(k);
}

Intrinsics Intrinsics::simple(double f, double cx, double cy) {
  Eigen::Matrix3d k;
  k << f, 0, cx, 0, f, cy, 0, 0, 1;
  return Intrinsics(k);
}

std::array<double, 9> Intrinsics::row_major() const {
  std::array<double, 9> v{};
  for (int i = 0; i < 9; ++i) v[i] = k_(i / 3, i % 3);
  return v;
}

Intrinsics scale_intrinsics(const Intrinsics& k, double factor) {
  if (!(factor > 0)) throw ConfigError("intrinsics scale factor must be positive");
  Eigen::Matrix3d m = k.matrix();
  m(0, 0) /= factor;
  m(0, 1) /= factor;
  m(1, 1) /= factor;
  m(0, 2) = (m(0, 2) + 0.5) / factor - 0.5;
  m(1, 2) = (m(1, 2) + 0.5) / factor - 0.5;
  return Intrinsics(m);
}

double pose_distance(const Pose& a, const Pose& b, double lambda) {
  const double dt = (a.translation() - b.translation()).norm();
  const Eigen::Matrix3d rel = a.rotation().transpose() * b.rotation();
  const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  return dt + lambda * std::acos(c);
}

namespace {

struct Warper {
  Eigen::Matrix3d k;
  Eigen::Matrix3d k_inv;
  Eigen::Matrix3d r;  // dst camera -> src camera
  Eigen::Vector3d t;

  Warper(const Pose& src, const Pose& dst, const Intrinsics& intr)
      : k(intr.matrix()), k_inv(intr.matrix().inverse()) {
    const Eigen::Matrix4d rel = src.inverse().matrix() * dst.matrix();
    r = rel.topLeftCorner<3, 3>();
    t = rel.topRightCorner<3, 1>();
  }

  Projection operator()(double row, double col, double depth) const {
    const Eigen::Vector3d p_dst = k_inv * Eigen::Vector3d(col, row, 1.0) * depth;
    const Eigen::Vector3d p_src = r * p_dst + t;
    const Eigen::Vector3d uv = k * p_src;
    if (p_src.z() < kMinDepth) return {kBehindCamera, kBehindCamera, p_src.z()};
    return {uv.y() / uv.z(), uv.x() / uv.z(), p_src.z()};
  }
};

}  // namespace

Projection project_pixel(const Pose& src, const Pose& dst, const Intrinsics& k, double row,
                         double col, double depth) {
  return Warper(src, dst, k)(row, col, depth);
}

Grid build_warp_grid(const Pose& src, const Pose& dst, const Intrinsics& k, double depth,
                     std::size_t h, std::size_t w) {
  if (!(depth > 0) || !std::isfinite(depth)) throw ConfigError("warp depth must be positive");
  const Warper warp(src, dst, k);
  std::vector<float> g(2 * h * w);
  for (std::size_t s = 0; s < h; ++s) {
    for (std::size_t t = 0; t < w; ++t) {
      const Projection p = warp(static_cast<double>(s), static_cast<double>(t), depth);
      // Keep far-off projections finite and well outside any plane.
      g[2 * (s * w + t)] = static_cast<float>(std::clamp(p.row, -1.0e6, 1.0e6));
      g[2 * (s * w + t) + 1] = static_cast<float>(std::clamp(p.col, -1.0e6, 1.0e6));
    }
  }
  return Grid(h, w, std::move(g));
}

DepthHypotheses DepthHypotheses::uniform_inverse(std::size_t count, double dmin, double dmax) {
  if (count == 0) throw ConfigError("hypothesis count must be positive");
  if (!(dmin > 0) || !(dmax > dmin)) throw ConfigError("depth range needs 0 < dmin < dmax");
  DepthHypotheses h;
  const double inv_near = 1.0 / dmin;
  const double inv_far = 1.0 / dmax;
  if (count == 1) {
    h.values.push_back(2.0 / (inv_near + inv_far));
    return h;
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(count - 1);
    h.values.push_back(1.0 / (inv_near + (inv_far - inv_near) * a));
  }
  h.values.front() = dmin;
  h.values.back() = dmax;
  return h;
}

FTensor depth_from_sigmoid(const FTensor& s, double dmin, double dmax) {
  const double span = 1.0 / dmin - 1.0 / dmax;
  std::vector<float> out(s.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(1.0 / (static_cast<double>(s[i]) * span + 1.0 / dmax));
  }
  return FTensor(s.shape(), std::move(out));
}

}  // namespace fadec
