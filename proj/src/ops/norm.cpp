#include "fadec/ops/norm.hpp"

#include <cmath>

#include "fadec/core/error.hpp"

namespace fadec {
namespace {

// Index of the parameter that applies to element i.
std::size_t broadcast_index(const FTensor& p, const FTensor& x, std::size_t i) {
  if (p.size() == 1) return 0;
  if (p.size() == x.size()) return i;
  return i / (x.size() / x.dim(0));
}

void check_broadcast(const FTensor& p, const FTensor& x, const char* name) {
  const bool ok = p.size() == 1 || p.size() == x.size() || (x.rank() >= 1 && p.size() == x.dim(0));
  if (!ok) {
    throw ShapeError(std::string("layer norm ") + name + " " + to_string(p.shape()) +
                     " does not broadcast to " + to_string(x.shape()));
  }
}

}  // namespace

FTensor layer_norm(const FTensor& x, const FTensor& gamma, const FTensor& beta, double eps) {
  check_broadcast(gamma, x, "gamma");
  check_broadcast(beta, x, "beta");
  const auto n = static_cast<double>(x.size());
  double sum = 0.0;
  for (float v : x.data()) sum += v;
  const double mean = sum / n;
  double sq = 0.0;
  for (float v : x.data()) sq += (v - mean) * (v - mean);
  const double var = sq / n;
  const double denom = std::sqrt(var + eps);
  std::vector<float> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double centered = x[i] - mean;
    // A constant input has zero deviation; keep it at 0 even when eps = 0.
    const double normed = centered == 0.0 ? 0.0 : centered / denom;
    y[i] = static_cast<float>(normed * gamma[broadcast_index(gamma, x, i)] +
                              beta[broadcast_index(beta, x, i)]);
  }
  return FTensor(x.shape(), std::move(y));
}

}  // namespace fadec
