#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fpd/error.hpp"

namespace fpd::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<Matrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const Matrix<T>>;
template <typename T>
using VectorMap = Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>;
template <typename T>
using ConstVectorMap = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;

std::string shape_string(const std::vector<int>& shape);

// Dense row-major array with an explicit shape.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, T fill = T{0}) : shape_(std::move(shape)) {
    data_.assign(element_count(shape_), fill);
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  void reshape(std::vector<int> shape) {
    if (element_count(shape) != data_.size()) {
      throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    }
    shape_ = std::move(shape);
  }

  // First dimension as rows, everything else flattened into columns.
  MatrixMap<T> matrix() { return {data_.data(), rows(), cols()}; }
  ConstMatrixMap<T> matrix() const { return {data_.data(), rows(), cols()}; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

  static std::size_t element_count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
      if (d < 0) throw ShapeError("negative dimension in " + shape_string(shape));
      n *= static_cast<std::size_t>(d);
    }
    return n;
  }

 private:
  Eigen::Index rows() const { return shape_.empty() ? 1 : shape_[0]; }
  Eigen::Index cols() const {
    const auto r = rows();
    return r == 0 ? 0 : static_cast<Eigen::Index>(data_.size()) / r;
  }

  std::vector<int> shape_;
  // Fixed alignment keeps Eigen's vectorized reductions bit-reproducible across allocations.
  std::vector<T, Eigen::aligned_allocator<T>> data_;
};

inline void require_shape(const std::vector<int>& got, const std::vector<int>& want, const char* what) {
  if (got != want) {
    throw ShapeError(std::string(what) + ": expected " + shape_string(want) + ", got " +
                     shape_string(got));
  }
}

}  // namespace fpd::nn
