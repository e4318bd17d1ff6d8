#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fadec {

/// Extents of a dense row-major tensor. Every extent is positive.
using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense tensor of finite reals, row-major. Immutable once constructed.
///
/// A default-constructed tensor is empty (rank 0, no elements) and is only
/// used as a placeholder for "not yet produced", e.g. the hidden state
/// before the first frame.
class FTensor {
 public:
  FTensor() = default;
  /// Throws ShapeError on a zero extent or length mismatch and InvalidData
  /// on a non-finite element.
  FTensor(Shape shape, std::vector<float> data);

  static FTensor zeros(Shape shape);
  static FTensor filled(Shape shape, float value);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> data() const noexcept { return data_; }
  float operator[](std::size_t i) const { return data_[i]; }

  /// Element (c, y, x) of a rank-3 CHW tensor.
  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }

  friend bool operator==(const FTensor&, const FTensor&) = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

/// Dense tensor of signed fixed-point integers. The represented real value
/// of element v is v / 2^exp. Every element lies in the signed range of
/// `bits` bits, checked on construction.
class QTensor {
 public:
  QTensor() = default;
  QTensor(Shape shape, std::vector<std::int32_t> data, int bits, int exp);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  int bits() const noexcept { return bits_; }
  int exp() const noexcept { return exp_; }

  std::span<const std::int32_t> data() const noexcept { return data_; }
  std::int32_t operator[](std::size_t i) const { return data_[i]; }

  friend bool operator==(const QTensor&, const QTensor&) = default;

 private:
  Shape shape_;
  std::vector<std::int32_t> data_;
  int bits_ = 0;
  int exp_ = 0;
};

/// Smallest and largest value representable in a signed `bits`-bit integer.
constexpr std::int64_t qmin(int bits) { return -(std::int64_t{1} << (bits - 1)); }
constexpr std::int64_t qmax(int bits) { return (std::int64_t{1} << (bits - 1)) - 1; }

}  // namespace fadec
