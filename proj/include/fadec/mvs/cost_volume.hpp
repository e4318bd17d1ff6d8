#pragma once

#include <span>
#include <vector>

#include "fadec/core/tensor.hpp"
#include "fadec/mvs/geometry.hpp"

namespace fadec {

/// Channel-mean of the elementwise product of two C x H x W features,
/// giving 1 x H x W. Channels accumulate in ascending order.
FTensor correlate(const FTensor& current, const FTensor& warped);

/// Stacks correlate(current, warped[d]) into a D x H x W cost volume.
/// Throws ShapeError if warped.size() differs from the hypothesis count or
/// any warped feature is shaped unlike current.
FTensor cost_volume_fusion(const FTensor& current, std::span<const FTensor> warped,
                           const DepthHypotheses& hyps);

/// Several measurement frames: warps[m][d] is frame m warped at hypothesis
/// d. The frames are summed per hypothesis before correlation.
FTensor cost_volume_fusion(const FTensor& current, std::span<const std::vector<FTensor>> warps,
                           const DepthHypotheses& hyps);

}  // namespace fadec
