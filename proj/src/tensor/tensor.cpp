#include "tensor/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

BNAS_NS_BEGIN

std::string Shape::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

Tensor::Tensor(Shape s, std::vector<real> data) : shape_(s), data_(std::move(data)) {
  BNAS_EXPECT(data_.size() == shape_.size(), ContractViolation,
              "tensor data length " + std::to_string(data_.size()) + " does not match shape " + s.str());
}

Tensor Tensor::from(Shape s, std::initializer_list<real> values) {
  return Tensor(s, std::vector<real>(values));
}

Tensor Tensor::reshaped(Shape s) const {
  BNAS_EXPECT(s.size() == shape_.size(), GeometryError,
              "cannot reshape " + shape_.str() + " to " + s.str());
  return Tensor(s, data_);
}

void Tensor::fill(real v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](real v) { return std::isfinite(v); });
}

real Tensor::item() const {
  BNAS_EXPECT(data_.size() == 1, ContractViolation, "item() on non-scalar tensor " + shape_.str());
  return data_[0];
}

void axpy(real a, std::span<const real> x, std::span<real> y) {
  BNAS_EXPECT(x.size() == y.size(), ContractViolation, "axpy length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double sum(const Tensor& t) {
  double s = 0;
  for (real v : t.span()) s += v;
  return s;
}

double abs_sum(const Tensor& t) {
  double s = 0;
  for (real v : t.span()) s += std::fabs(static_cast<double>(v));
  return s;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  BNAS_EXPECT(a.shape() == b.shape(), GeometryError,
              "shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

BNAS_NS_END
