#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "fadec/core/tensor.hpp"
#include "fadec/mvs/geometry.hpp"

namespace fadec {

struct KeyframeOptions {
  std::size_t capacity = 8;
  double lambda = 1.0;     ///< weight of the rotation angle in pose_distance
  double threshold = 0.35; ///< largest admissible pose distance
};

struct Keyframe {
  Pose pose;
  FTensor feature;
};

/// FIFO store of (pose, feature) pairs, oldest first.
class KeyframeBuffer {
 public:
  /// `feature_shape`, when given, is enforced on every store.
  explicit KeyframeBuffer(KeyframeOptions opts = {}, Shape feature_shape = {});

  const KeyframeOptions& options() const noexcept { return opts_; }
  const std::deque<Keyframe>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  /// Most recently stored entry.
  const Keyframe* latest() const noexcept { return entries_.empty() ? nullptr : &entries_.back(); }

  /// Appends, evicting the oldest entry beyond capacity. Throws ShapeError
  /// when the feature shape differs from the configured one.
  void store(const Pose& pose, FTensor feature);

  /// Entry with the smallest pose distance to `current` if that distance is
  /// within the threshold; ties go to the most recent entry.
  std::optional<Keyframe> select(const Pose& current) const;

  /// Up to n admissible entries ordered by distance, most recent first on
  /// ties.
  std::vector<Keyframe> select_n(const Pose& current, std::size_t n) const;

 private:
  KeyframeOptions opts_;
  Shape feature_shape_;
  std::deque<Keyframe> entries_;
};

}  // namespace fadec
