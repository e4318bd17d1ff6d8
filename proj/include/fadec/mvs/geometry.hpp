#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fadec/core/tensor.hpp"
#include "fadec/ops/resample.hpp"

namespace fadec {

/// Rigid 4x4 camera-to-global transform.
class Pose {
 public:
  Pose() : m_(Eigen::Matrix4d::Identity()) {}
  /// Throws InvalidData unless the bottom row is (0,0,0,1) and the rotation
  /// block is orthonormal with determinant +1 within 1e-4.
  explicit Pose(const Eigen::Matrix4d& m);

  static Pose from_rt(const Eigen::Matrix3d& r, const Eigen::Vector3d& t);
  static Pose from_row_major(std::span<const double> v);

  const Eigen::Matrix4d& matrix() const noexcept { return m_; }
  Eigen::Matrix3d rotation() const { return m_.topLeftCorner<3, 3>(); }
  Eigen::Vector3d translation() const { return m_.topRightCorner<3, 1>(); }
  Pose inverse() const;
  std::array<double, 16> row_major() const;

 private:
  Eigen::Matrix4d m_;
};

/// Pinhole intrinsics: upper-triangular with positive focal terms and
/// K(2,2) = 1. Pixel (row, col) has image coordinates (u, v) = (col, row).
class Intrinsics {
 public:
  Intrinsics() = default;
  explicit Intrinsics(const Eigen::Matrix3d& k);
  static Intrinsics from_row_major(std::span<const double> v);
  static Intrinsics simple(double f, double cx, double cy);

  const Eigen::Matrix3d& matrix() const noexcept { return k_; }
  std::array<double, 9> row_major() const;

 private:
  Eigen::Matrix3d k_ = Eigen::Matrix3d::Identity();
};

/// Intrinsics for an image downscaled by `factor` with pixel-center
/// alignment: f' = f / factor, c' = (c + 0.5) / factor - 0.5.
Intrinsics scale_intrinsics(const Intrinsics& k, double factor);

/// ||t1 - t2|| + lambda * angle(R1^T R2), angle in radians.
double pose_distance(const Pose& a, const Pose& b, double lambda);

/// Where a destination pixel lands in the source camera when the scene point
/// sits at `depth` along the destination ray.
struct Projection {
  double row = 0;
  double col = 0;
  double depth = 0;  ///< z of the point in the source camera
};
Projection project_pixel(const Pose& src, const Pose& dst, const Intrinsics& k, double row,
                         double col, double depth);

/// Coordinate used for points behind the source camera; far enough out of
/// bounds that every tap reads zero.
inline constexpr float kBehindCamera = -1.0e6f;

/// Plane-sweep warp: for every destination pixel, back-project at `depth`,
/// move into the source camera with src^-1 * dst and project. Points with
/// source depth below 1e-6 map to kBehindCamera.
Grid build_warp_grid(const Pose& src, const Pose& dst, const Intrinsics& k, double depth,
                     std::size_t h, std::size_t w);

/// Candidate depths, strictly increasing and uniform in inverse depth.
struct DepthHypotheses {
  std::vector<double> values;

  std::size_t count() const noexcept { return values.size(); }
  /// Throws ConfigError unless count >= 1 and 0 < dmin < dmax.
  static DepthHypotheses uniform_inverse(std::size_t count, double dmin, double dmax);
};

/// Network output s in [0, 1] to depth: 1 / (s (1/dmin - 1/dmax) + 1/dmax).
FTensor depth_from_sigmoid(const FTensor& s, double dmin, double dmax);

/// Camera frame fed to the pipeline.
struct Frame {
  FTensor image;  ///< C x H x W
  Pose pose;
  Intrinsics intrinsics;
};

}  // namespace fadec
