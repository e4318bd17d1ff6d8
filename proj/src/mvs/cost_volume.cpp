#include "fadec/mvs/cost_volume.hpp"

#include "fadec/core/error.hpp"
#include "fadec/kernels/kernels.hpp"
#include "fadec/ops/eltwise.hpp"
#include "fadec/ops/layout.hpp"

namespace fadec {

FTensor correlate(const FTensor& current, const FTensor& warped) {
  if (current.rank() != 3 || current.shape() != warped.shape()) {
    throw ShapeError("correlate needs equal CHW features, got " + to_string(current.shape()) +
                     " and " + to_string(warped.shape()));
  }
  const std::size_t c = current.dim(0), h = current.dim(1), w = current.dim(2);
  const std::size_t plane = h * w;
  std::vector<float> acc(plane, 0.0f);
  const auto& kt = kernels::active();
  for (std::size_t ch = 0; ch < c; ++ch) {
    kt.mul_acc_f32(current.data().data() + ch * plane, warped.data().data() + ch * plane,
                   acc.data(), plane);
  }
  const float inv = 1.0f / static_cast<float>(c);
  for (auto& v : acc) v *= inv;
  return FTensor({1, h, w}, std::move(acc));
}

FTensor cost_volume_fusion(const FTensor& current, std::span<const FTensor> warped,
                           const DepthHypotheses& hyps) {
  if (warped.size() != hyps.count()) {
    throw ShapeError(std::to_string(warped.size()) + " warped features for " +
                     std::to_string(hyps.count()) + " hypotheses");
  }
  std::vector<FTensor> slices;
  slices.reserve(warped.size());
  for (const auto& wf : warped) slices.push_back(correlate(current, wf));
  return concat(slices, 0);
}

FTensor cost_volume_fusion(const FTensor& current, std::span<const std::vector<FTensor>> warps,
                           const DepthHypotheses& hyps) {
  if (warps.empty()) throw ShapeError("cost volume needs at least one measurement frame");
  std::vector<FTensor> summed;
  for (std::size_t d = 0; d < hyps.count(); ++d) {
    for (const auto& frame : warps) {
      if (frame.size() != hyps.count()) {
        throw ShapeError(std::to_string(frame.size()) + " warped features for " +
                         std::to_string(hyps.count()) + " hypotheses");
      }
    }
    FTensor s = warps[0][d];
    for (std::size_t m = 1; m < warps.size(); ++m) s = add(s, warps[m][d]);
    summed.push_back(std::move(s));
  }
  return cost_volume_fusion(current, summed, hyps);
}

}  // namespace fadec
