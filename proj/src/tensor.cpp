#include "vinet/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace vinet {

namespace {
std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != product(shape_)) {
    throw ShapeError("Tensor: data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str(shape_));
  }
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const {
  if (product(new_shape) != data_.size()) {
    throw ShapeError("reshape: element count mismatch (" + shape_str(shape_) +
                     " -> " + shape_str(new_shape) + ")");
  }
  return Tensor(std::move(new_shape), data_);
}

std::vector<double>& Tensor::grad() {
  if (grad_.empty()) grad_.assign(data_.size(), 0.0);
  return grad_;
}

const std::vector<double>& Tensor::grad() const {
  if (grad_.empty()) grad_.assign(data_.size(), 0.0);
  return grad_;
}

void Tensor::zero_grad() {
  grad_.assign(data_.size(), 0.0);
}

bool Tensor::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void require_shape(const Tensor& t, const std::vector<std::size_t>& shape,
                   const char* what) {
  if (t.shape() != shape) {
    throw ShapeError(std::string(what) + ": expected " + shape_str(shape) +
                     ", got " + shape_str(t.shape()));
  }
}

#ifndef NDEBUG
void check_finite(const Tensor& t, const char* what) {
  if (!t.all_finite()) {
    throw NumericError(std::string(what) + ": non-finite value");
  }
}
#endif

}  // namespace vinet
