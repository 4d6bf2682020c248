#include "rulfdia/nn/matrix.hpp"

#include <algorithm>
#include <string>

namespace rulfdia::nn {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void require_same_shape(const Matrix& a, const Matrix& b, const char* context) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(context) + ": shape " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

namespace {

void check_concat(const Matrix& w, std::size_t a, std::size_t b, std::size_t y, const char* ctx) {
  if (w.cols() != a + b || w.rows() != y)
    throw ShapeError(std::string(ctx) + ": weight " + std::to_string(w.rows()) + "x" +
                     std::to_string(w.cols()) + " does not fit input " + std::to_string(a) + "+" +
                     std::to_string(b) + " -> " + std::to_string(y));
}

}  // namespace

void affine_concat_acc(const Matrix& w, std::span<const double> a, std::span<const double> b,
                       std::span<double> y) {
  check_concat(w, a.size(), b.size(), y.size(), "affine_concat_acc");
  const std::size_t na = a.size();
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double* wr = w.row(r).data();
    double acc = 0.0;
    for (std::size_t j = 0; j < na; ++j) acc += wr[j] * a[j];
    const double* wb = wr + na;
    for (std::size_t j = 0; j < b.size(); ++j) acc += wb[j] * b[j];
    y[r] += acc;
  }
}

void affine_concat_backward(const Matrix& w, std::span<const double> dy, std::span<double> da,
                            std::span<double> db) {
  check_concat(w, da.size(), db.size(), dy.size(), "affine_concat_backward");
  const std::size_t na = da.size();
  for (std::size_t r = 0; r < dy.size(); ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    const double* wr = w.row(r).data();
    for (std::size_t j = 0; j < na; ++j) da[j] += wr[j] * g;
    const double* wb = wr + na;
    for (std::size_t j = 0; j < db.size(); ++j) db[j] += wb[j] * g;
  }
}

void outer_concat_acc(Matrix& g, std::span<const double> dy, std::span<const double> a,
                      std::span<const double> b) {
  check_concat(g, a.size(), b.size(), dy.size(), "outer_concat_acc");
  const std::size_t na = a.size();
  for (std::size_t r = 0; r < dy.size(); ++r) {
    const double d = dy[r];
    if (d == 0.0) continue;
    double* gr = g.row(r).data();
    for (std::size_t j = 0; j < na; ++j) gr[j] += d * a[j];
    double* gb = gr + na;
    for (std::size_t j = 0; j < b.size(); ++j) gb[j] += d * b[j];
  }
}

}  // namespace rulfdia::nn
