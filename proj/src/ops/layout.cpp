#include "fadec/ops/layout.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "fadec/core/error.hpp"
#include "fadec/numerics/fixed_point.hpp"

namespace fadec {

namespace {

// Rows of `inner` elements per outer index; the concat axis contributes
// extent * inner contiguous elements.
struct Split {
  std::size_t outer = 1;
  std::size_t inner = 1;
};

Split split_at(const Shape& s, std::size_t axis) {
  Split sp;
  for (std::size_t i = 0; i < axis; ++i) sp.outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) sp.inner *= s[i];
  return sp;
}

template <typename T>
Shape concat_shape(std::span<const T> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of no tensors");
  const Shape& ref = parts[0].shape();
  if (axis >= ref.size()) throw ShapeError("concat axis out of range for " + to_string(ref));
  Shape out = ref;
  out[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == ref.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == axis || s[i] == ref[i];
    if (!ok) throw ShapeError("concat extents differ: " + to_string(ref) + " vs " + to_string(s));
    out[axis] += s[axis];
  }
  return out;
}

template <typename T, typename U, typename F>
std::vector<U> gather_concat(std::span<const T> parts, std::size_t axis, const Shape& out_shape,
                             F convert) {
  const Split sp = split_at(out_shape, axis);
  std::vector<U> out;
  out.reserve(element_count(out_shape));
  for (std::size_t o = 0; o < sp.outer; ++o) {
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const std::size_t run = parts[k].shape()[axis] * sp.inner;
      const auto src = parts[k].data().subspan(o * run, run);
      for (auto v : src) out.push_back(convert(k, v));
    }
  }
  return out;
}

template <typename T>
std::vector<T> gather_slice(std::span<const T> data, const Shape& shape, std::size_t axis,
                            std::size_t start, std::size_t stop, Shape& out_shape) {
  if (axis >= shape.size()) throw ShapeError("slice axis out of range for " + to_string(shape));
  if (start >= stop || stop > shape[axis]) {
    throw ShapeError("slice [" + std::to_string(start) + ", " + std::to_string(stop) +
                     ") invalid for extent " + std::to_string(shape[axis]));
  }
  out_shape = shape;
  out_shape[axis] = stop - start;
  const Split sp = split_at(shape, axis);
  std::vector<T> out;
  out.reserve(element_count(out_shape));
  for (std::size_t o = 0; o < sp.outer; ++o) {
    const auto src = data.subspan((o * shape[axis] + start) * sp.inner, (stop - start) * sp.inner);
    out.insert(out.end(), src.begin(), src.end());
  }
  return out;
}

}  // namespace

FTensor concat(std::span<const FTensor> parts, std::size_t axis) {
  Shape shape = concat_shape(parts, axis);
  auto data = gather_concat<FTensor, float>(parts, axis, shape, [](std::size_t, float v) { return v; });
  return FTensor(std::move(shape), std::move(data));
}

QTensor concat(std::span<const QTensor> parts, std::size_t axis, int out_exp, int out_bits) {
  Shape shape = concat_shape(parts, axis);
  auto data = gather_concat<QTensor, std::int32_t>(
      parts, axis, shape, [&](std::size_t k, std::int32_t v) {
        return static_cast<std::int32_t>(clip(rescale(v, parts[k].exp(), out_exp), out_bits));
      });
  return QTensor(std::move(shape), std::move(data), out_bits, out_exp);
}

QTensor concat(std::span<const QTensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of no tensors");
  int exp = parts[0].exp();
  int bits = parts[0].bits();
  for (const auto& p : parts) {
    exp = std::max(exp, p.exp());
    bits = std::max(bits, p.bits());
  }
  return concat(parts, axis, exp, bits);
}

FTensor slice(const FTensor& x, std::size_t axis, std::size_t start, std::size_t stop) {
  Shape shape;
  auto data = gather_slice(x.data(), x.shape(), axis, start, stop, shape);
  return FTensor(std::move(shape), std::move(data));
}

QTensor slice(const QTensor& x, std::size_t axis, std::size_t start, std::size_t stop) {
  Shape shape;
  auto data = gather_slice(x.data(), x.shape(), axis, start, stop, shape);
  return QTensor(std::move(shape), std::move(data), x.bits(), x.exp());
}

}  // namespace fadec
