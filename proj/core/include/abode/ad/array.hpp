#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace abode::ad {

/// Dense row-major matrix of 64-bit reals. Vectors are 1×n or n×1, scalars 1×1.
class Array {
 public:
  Array() = default;
  Array(std::size_t rows, std::size_t cols, double fill = 0.0);
  Array(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Array scalar(double value) { return Array(1, 1, value); }
  static Array row(std::initializer_list<double> values);
  static Array column(std::initializer_list<double> values);
  static Array from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  std::array<std::size_t, 2> shape() const { return {rows_, cols_}; }
  bool empty() const { return values_.empty(); }
  bool same_shape(const Array& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  /// Value of a 1×1 array; throws ShapeError otherwise.
  double item() const;

  bool all_finite() const;
  double max_abs() const;

  Array& operator+=(const Array& other);
  Array& operator-=(const Array& other);
  Array& operator*=(double factor);

  friend Array operator+(Array lhs, const Array& rhs) { return lhs += rhs; }
  friend Array operator-(Array lhs, const Array& rhs) { return lhs -= rhs; }
  friend Array operator*(double factor, Array rhs) { return rhs *= factor; }
  friend Array operator*(Array lhs, double factor) { return lhs *= factor; }

  friend bool operator==(const Array&, const Array&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

std::string shape_string(const Array& a);

}  // namespace abode::ad
