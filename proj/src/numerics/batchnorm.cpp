#include "fadec/numerics/batchnorm.hpp"

#include <cmath>

#include "fadec/core/error.hpp"

namespace fadec {

std::pair<FTensor, FTensor> fold_batchnorm(const FTensor& conv_w, const FTensor& conv_b,
                                           const FTensor& bn_gamma, const FTensor& bn_beta,
                                           const FTensor& bn_mean, const FTensor& bn_var,
                                           double eps) {
  if (conv_w.rank() < 1) throw ShapeError("conv weight has no output-channel axis");
  const std::size_t out_ch = conv_w.dim(0);
  for (const FTensor* v : {&conv_b, &bn_gamma, &bn_beta, &bn_mean, &bn_var}) {
    if (v->size() != out_ch) {
      throw ShapeError("per-channel vector of length " + std::to_string(v->size()) +
                       " for " + std::to_string(out_ch) + " output channels");
    }
  }
  const std::size_t per_ch = conv_w.size() / out_ch;
  std::vector<float> w(conv_w.size());
  std::vector<float> b(out_ch);
  for (std::size_t c = 0; c < out_ch; ++c) {
    if (bn_var[c] < 0.0f) throw InvalidData("negative BN variance at channel " + std::to_string(c));
    const double g = static_cast<double>(bn_gamma[c]) / std::sqrt(static_cast<double>(bn_var[c]) + eps);
    for (std::size_t i = 0; i < per_ch; ++i) {
      w[c * per_ch + i] = static_cast<float>(conv_w[c * per_ch + i] * g);
    }
    b[c] = static_cast<float>((static_cast<double>(conv_b[c]) - bn_mean[c]) * g + bn_beta[c]);
  }
  return {FTensor(conv_w.shape(), std::move(w)), FTensor(conv_b.shape(), std::move(b))};
}

}  // namespace fadec
