#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rprl/errors.hpp"

namespace rprl::nn {

using Shape = std::vector<int>;

// Storage starts on a 64-byte boundary. Vectorised kernels split loops by
// address alignment, so unaligned buffers could round differently from run to
// run.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

  template <typename U>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
    return true;
  }
};

inline std::size_t shape_size(std::span<const int> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t acc, int d) { return acc * static_cast<std::size_t>(d); });
}

inline std::string shape_to_string(std::span<const int> shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

// Dense row-major n-d array. Images use HWC layout; batches prepend N.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;
  using Storage = std::vector<T, AlignedAllocator<T>>;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, T fill = T{0}) : shape_(std::move(shape)) {
    validate_dims();
    data_.assign(shape_size(shape_), fill);
  }

  BasicTensor(Shape shape, std::span<const T> data) : shape_(std::move(shape)), data_(data.begin(), data.end()) {
    check_length();
  }
  BasicTensor(Shape shape, std::initializer_list<T> data) : shape_(std::move(shape)), data_(data) { check_length(); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  int dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  void reshape(Shape shape) {
    if (shape_size(shape) != data_.size()) {
      throw ShapeError("cannot reshape " + shape_to_string(shape_) + " to " +
                       shape_to_string(shape));
    }
    shape_ = std::move(shape);
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  template <typename U>
  BasicTensor<U> cast() const {
    const std::vector<U> converted(data_.begin(), data_.end());
    return BasicTensor<U>(shape_, converted);
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  void check_length() const {
    validate_dims();
    if (data_.size() != shape_size(shape_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                       shape_to_string(shape_));
    }
  }

  void validate_dims() const {
    for (int d : shape_) {
      if (d <= 0) throw ShapeError("tensor dims must be positive, got " + shape_to_string(shape_));
    }
  }

  Shape shape_;
  Storage data_;
};

using Tensor = BasicTensor<float>;

}  // namespace rprl::nn
