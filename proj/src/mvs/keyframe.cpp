#include "fadec/mvs/keyframe.hpp"

#include <algorithm>

#include "fadec/core/error.hpp"

namespace fadec {

KeyframeBuffer::KeyframeBuffer(KeyframeOptions opts, Shape feature_shape)
    : opts_(opts), feature_shape_(std::move(feature_shape)) {
  if (opts_.capacity == 0) throw ConfigError("keyframe buffer capacity must be positive");
  if (opts_.lambda < 0 || opts_.threshold < 0) {
    throw ConfigError("keyframe lambda and threshold must be non-negative");
  }
}

void KeyframeBuffer::store(const Pose& pose, FTensor feature) {
  if (!feature_shape_.empty() && feature.shape() != feature_shape_) {
    throw ShapeError("keyframe feature " + to_string(feature.shape()) + ", buffer holds " +
                     to_string(feature_shape_));
  }
  entries_.push_back({pose, std::move(feature)});
  while (entries_.size() > opts_.capacity) entries_.pop_front();
}

std::optional<Keyframe> KeyframeBuffer::select(const Pose& current) const {
  auto best = select_n(current, 1);
  if (best.empty()) return std::nullopt;
  return std::move(best.front());
}

std::vector<Keyframe> KeyframeBuffer::select_n(const Pose& current, std::size_t n) const {
  struct Candidate {
    double distance;
    std::size_t index;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double d = pose_distance(entries_[i].pose, current, opts_.lambda);
    if (d <= opts_.threshold) cands.push_back({d, i});
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index > b.index;
  });
  std::vector<Keyframe> out;
  for (std::size_t i = 0; i < std::min(n, cands.size()); ++i) out.push_back(entries_[cands[i].index]);
  return out;
}

}  // namespace fadec
