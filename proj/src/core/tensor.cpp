#include "fadec/core/tensor.hpp"

#include <cmath>
#include <sstream>

#include "fadec/core/error.hpp"

namespace fadec {

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return shape.empty() ? 0 : n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ')';
  return os.str();
}

namespace {

void check_shape(const Shape& shape, std::size_t length) {
  for (auto e : shape) {
    if (e == 0) throw ShapeError("zero extent in " + to_string(shape));
  }
  if (element_count(shape) != length) {
    throw ShapeError("shape " + to_string(shape) + " needs " +
                     std::to_string(element_count(shape)) + " elements, got " +
                     std::to_string(length));
  }
}

}  // namespace

FTensor::FTensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_, data_.size());
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw InvalidData("non-finite value at element " + std::to_string(i));
    }
  }
}

FTensor FTensor::zeros(Shape shape) { return filled(std::move(shape), 0.0f); }

FTensor FTensor::filled(Shape shape, float value) {
  auto n = element_count(shape);
  return FTensor(std::move(shape), std::vector<float>(n, value));
}

QTensor::QTensor(Shape shape, std::vector<std::int32_t> data, int bits, int exp)
    : shape_(std::move(shape)), data_(std::move(data)), bits_(bits), exp_(exp) {
  if (bits_ < 2 || bits_ > 32) {
    throw ConfigError("bit width " + std::to_string(bits_) + " outside [2, 32]");
  }
  check_shape(shape_, data_.size());
  const auto lo = qmin(bits_);
  const auto hi = qmax(bits_);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i] < lo || data_[i] > hi) {
      throw InvalidData("element " + std::to_string(i) + " = " + std::to_string(data_[i]) +
                        " outside " + std::to_string(bits_) + "-bit range");
    }
  }
}

}  // namespace fadec
