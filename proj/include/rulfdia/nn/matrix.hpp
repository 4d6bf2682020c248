#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "rulfdia/errors.hpp"

namespace rulfdia::nn {

/// Dense row-major matrix of doubles. Vectors are plain std::vector<double>;
/// biases are stored as q x 1 matrices so every parameter shares one type.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double v);
  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

void require_same_shape(const Matrix& a, const Matrix& b, const char* context);

/// y += W * [a, b], where W has a.size() + b.size() columns. An empty span for
/// either part is allowed; the column split is implied by the span sizes.
void affine_concat_acc(const Matrix& w, std::span<const double> a, std::span<const double> b,
                       std::span<double> y);

/// da += W[:, :|a|]^T * dy and db += W[:, |a|:]^T * dy.
void affine_concat_backward(const Matrix& w, std::span<const double> dy, std::span<double> da,
                            std::span<double> db);

/// G += dy * [a, b]^T.
void outer_concat_acc(Matrix& g, std::span<const double> dy, std::span<const double> a,
                      std::span<const double> b);

}  // namespace rulfdia::nn
