#include "abode/ad/array.hpp"

#include <algorithm>
#include <cmath>

#include "abode/error.hpp"

namespace abode::ad {

Array::Array(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Array::Array(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ShapeError("array of shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " given " + std::to_string(values_.size()) + " values");
  }
}

Array Array::row(std::initializer_list<double> values) {
  return Array(1, values.size(), std::vector<double>(values));
}

Array Array::column(std::initializer_list<double> values) {
  return Array(values.size(), 1, std::vector<double>(values));
}

Array Array::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged rows in Array::from_rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Array(r, c, std::move(values));
}

double Array::item() const {
  if (rows_ != 1 || cols_ != 1) throw ShapeError("item() on array of shape " + shape_string(*this));
  return values_[0];
}

bool Array::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Array::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Array& Array::operator+=(const Array& other) {
  if (!same_shape(other)) {
    throw ShapeError("shape mismatch in +=: " + shape_string(*this) + " vs " + shape_string(other));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Array& Array::operator-=(const Array& other) {
  if (!same_shape(other)) {
    throw ShapeError("shape mismatch in -=: " + shape_string(*this) + " vs " + shape_string(other));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Array& Array::operator*=(double factor) {
  for (double& v : values_) v *= factor;
  return *this;
}

std::string shape_string(const Array& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

}  // namespace abode::ad
