#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "vinet/errors.hpp"

namespace vinet {

// Dense row-major n-d array of doubles with an optional gradient buffer of
// the same shape. This is the carrier for all network math.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<std::size_t> shape, double value);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  std::size_t extent(std::size_t d) const { return shape_.at(d); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }
  double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }

  void fill(double v);
  Tensor reshaped(std::vector<std::size_t> new_shape) const;

  // Gradient buffer management. grad() allocates (zeroed) on first use.
  bool has_grad() const { return !grad_.empty(); }
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  void zero_grad();
  void drop_grad() { grad_.clear(); }

  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
  mutable std::vector<double> grad_;
};

std::string shape_str(const std::vector<std::size_t>& shape);
void require_shape(const Tensor& t, const std::vector<std::size_t>& shape,
                   const char* what);

// Debug-mode NaN/Inf guard; compiled out in release builds.
#ifdef NDEBUG
inline void check_finite(const Tensor&, const char*) {}
#else
void check_finite(const Tensor& t, const char* what);
#endif

}  // namespace vinet
