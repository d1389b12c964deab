#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "common/config.hpp"

BNAS_NS_BEGIN

/// NCHW dimensions. Two-dimensional data (batch x features) uses h = w = 1.
struct Shape {
  int n = 0, c = 0, h = 0, w = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::size_t item() const { return static_cast<std::size_t>(c) * h * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape s, real fill = 0) : shape_(s), data_(s.size(), fill) {}
  Tensor(Shape s, std::vector<real> data);

  static Tensor zeros(Shape s) { return Tensor(s); }
  static Tensor scalar(real v) { return Tensor({1, 1, 1, 1}, v); }
  static Tensor from(Shape s, std::initializer_list<real> values);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  real* data() { return data_.data(); }
  const real* data() const { return data_.data(); }
  std::span<real> span() { return data_; }
  std::span<const real> span() const { return data_; }
  std::vector<real>& vec() { return data_; }
  const std::vector<real>& vec() const { return data_; }

  real& operator[](std::size_t i) { return data_[i]; }
  real operator[](std::size_t i) const { return data_[i]; }
  real& at(int n, int c, int h, int w) { return data_[index(n, c, h, w)]; }
  real at(int n, int c, int h, int w) const { return data_[index(n, c, h, w)]; }

  std::size_t index(int n, int c, int h, int w) const {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }

  /// Same data under a new shape of equal size.
  Tensor reshaped(Shape s) const;
  void fill(real v);
  bool all_finite() const;
  real item() const;

 private:
  Shape shape_{};
  std::vector<real> data_;
};

/// y += a * x
void axpy(real a, std::span<const real> x, std::span<real> y);
double sum(const Tensor& t);
double abs_sum(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);

BNAS_NS_END
