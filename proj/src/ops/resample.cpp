#include "fadec/ops/resample.hpp"

#include <algorithm>
#include <cmath>

#include "fadec/core/error.hpp"
#include "fadec/kernels/kernels.hpp"

namespace fadec {

Grid::Grid(std::size_t h, std::size_t w, std::vector<float> data)
    : h_(h), w_(w), data_(std::move(data)) {
  if (h_ == 0 || w_ == 0 || data_.size() != 2 * h_ * w_) {
    throw ShapeError("grid of " + std::to_string(data_.size()) + " values is not " +
                     std::to_string(h_) + "x" + std::to_string(w_) + "x2");
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw InvalidData("non-finite grid coordinate");
  }
}

Grid Grid::identity(std::size_t h, std::size_t w) {
  std::vector<float> d(2 * h * w);
  for (std::size_t s = 0; s < h; ++s) {
    for (std::size_t t = 0; t < w; ++t) {
      d[2 * (s * w + t)] = static_cast<float>(s);
      d[2 * (s * w + t) + 1] = static_cast<float>(t);
    }
  }
  return Grid(h, w, std::move(d));
}

FTensor grid_sample(const FTensor& x, const Grid& g) {
  if (x.rank() != 3) throw ShapeError("grid_sample input must be CHW, got " + to_string(x.shape()));
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t n = g.height() * g.width();
  std::vector<float> y(c * n);
  const auto& kt = kernels::active();
  for (std::size_t ch = 0; ch < c; ++ch) {
    kt.grid_sample_plane(x.data().data() + ch * h * w, h, w, g.data().data(), y.data() + ch * n, n);
  }
  return FTensor({c, g.height(), g.width()}, std::move(y));
}

namespace {

template <typename T>
std::vector<T> replicate(std::span<const T> in, const Shape& shape, std::size_t factor,
                         Shape& out_shape) {
  if (shape.size() < 2) throw ShapeError("upsampling needs two spatial axes");
  if (factor == 0) throw ConfigError("upsampling factor must be positive");
  const std::size_t h = shape[shape.size() - 2], w = shape[shape.size() - 1];
  const std::size_t planes = in.size() / (h * w);
  out_shape = shape;
  out_shape[shape.size() - 2] = h * factor;
  out_shape[shape.size() - 1] = w * factor;
  const std::size_t oh = h * factor, ow = w * factor;
  std::vector<T> out(planes * oh * ow);
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t y = 0; y < oh; ++y) {
      const T* src = in.data() + p * h * w + (y / factor) * w;
      T* dst = out.data() + (p * oh + y) * ow;
      for (std::size_t x = 0; x < ow; ++x) dst[x] = src[x / factor];
    }
  }
  return out;
}

}  // namespace

FTensor upsample_nearest(const FTensor& x, std::size_t factor) {
  Shape shape;
  auto data = replicate(x.data(), x.shape(), factor, shape);
  return FTensor(std::move(shape), std::move(data));
}

QTensor upsample_nearest(const QTensor& x, std::size_t factor) {
  Shape shape;
  auto data = replicate(x.data(), x.shape(), factor, shape);
  return QTensor(std::move(shape), std::move(data), x.bits(), x.exp());
}

FTensor upsample_bilinear(const FTensor& x, std::size_t factor) {
  if (x.rank() < 2) throw ShapeError("upsampling needs two spatial axes");
  if (factor == 0) throw ConfigError("upsampling factor must be positive");
  const std::size_t h = x.dim(x.rank() - 2), w = x.dim(x.rank() - 1);
  const std::size_t planes = x.size() / (h * w);
  const std::size_t oh = h * factor, ow = w * factor;

  struct Tap {
    std::size_t lo, hi;
    double frac;
  };
  const auto taps = [factor](std::size_t out, std::size_t in) {
    std::vector<Tap> t(out);
    for (std::size_t o = 0; o < out; ++o) {
      double src = (static_cast<double>(o) + 0.5) / static_cast<double>(factor) - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<std::size_t>(std::floor(src));
      t[o] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
    }
    return t;
  };
  const auto ty = taps(oh, h);
  const auto tx = taps(ow, w);

  Shape shape = x.shape();
  shape[shape.size() - 2] = oh;
  shape[shape.size() - 1] = ow;
  std::vector<float> out(planes * oh * ow);
  const float* src = x.data().data();
  for (std::size_t p = 0; p < planes; ++p) {
    const float* plane = src + p * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      const auto [y0, y1, fy] = ty[oy];
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const auto [x0, x1, fx] = tx[ox];
        const double top = (1.0 - fx) * plane[y0 * w + x0] + fx * plane[y0 * w + x1];
        const double bot = (1.0 - fx) * plane[y1 * w + x0] + fx * plane[y1 * w + x1];
        out[(p * oh + oy) * ow + ox] = static_cast<float>((1.0 - fy) * top + fy * bot);
      }
    }
  }
  return FTensor(std::move(shape), std::move(out));
}

}  // namespace fadec
