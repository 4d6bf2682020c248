#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "rulfdia/nn/activation.hpp"
#include "rulfdia/nn/matrix.hpp"

namespace rulfdia::nn {

/// Gate weights act on the concatenation [h_prev, x], so every weight matrix
/// is hidden x (hidden + input); the first `hidden` columns multiply h_prev.
struct GruLayerParams {
  Matrix w_z, w_r, w_h;
  Matrix b_z, b_r, b_h;

  static GruLayerParams zeros(std::size_t hidden, std::size_t input);
  std::size_t hidden() const { return b_z.rows(); }
  std::size_t input() const { return w_z.cols() - hidden(); }
  void check_shapes() const;
  bool operator==(const GruLayerParams&) const = default;
};

struct LstmLayerParams {
  Matrix w_i, w_f, w_o, w_c;
  Matrix b_i, b_f, b_o, b_c;

  static LstmLayerParams zeros(std::size_t hidden, std::size_t input);
  std::size_t hidden() const { return b_i.rows(); }
  std::size_t input() const { return w_i.cols() - hidden(); }
  void check_shapes() const;
  bool operator==(const LstmLayerParams&) const = default;
};

/// Kernels are stored filters x (kernel_len * in_channels), the column index
/// being k * in_channels + c. Stride 1, zero "same" padding, ReLU output.
struct Conv1dLayerParams {
  Matrix kernels;
  Matrix biases;
  std::size_t kernel_len = 3;

  static Conv1dLayerParams zeros(std::size_t filters, std::size_t kernel_len,
                                 std::size_t in_channels);
  std::size_t filters() const { return biases.rows(); }
  std::size_t in_channels() const { return kernel_len ? kernels.cols() / kernel_len : 0; }
  double& weight(std::size_t f, std::size_t k, std::size_t c) {
    return kernels(f, k * in_channels() + c);
  }
  void check_shapes() const;
  bool operator==(const Conv1dLayerParams&) const = default;
};

struct DenseLayerParams {
  Matrix w;
  Matrix b;

  static DenseLayerParams zeros(std::size_t out, std::size_t in);
  std::size_t out() const { return w.rows(); }
  std::size_t in() const { return w.cols(); }
  void check_shapes() const;
  bool operator==(const DenseLayerParams&) const = default;
};

// Single-step cells. `act` is the candidate/output activation (tanh by default).

struct GruStep {
  std::vector<double> z, r, candidate, h;
};
GruStep gru_step(const GruLayerParams& p, std::span<const double> x, std::span<const double> h_prev,
                 Activation act = Activation::Tanh);
std::vector<double> gru_cell(const GruLayerParams& p, std::span<const double> x,
                             std::span<const double> h_prev, Activation act = Activation::Tanh);

struct LstmStep {
  std::vector<double> i, f, o, candidate, c, h;
};
LstmStep lstm_step(const LstmLayerParams& p, std::span<const double> x,
                   std::span<const double> h_prev, std::span<const double> c_prev,
                   Activation act = Activation::Tanh);
/// Returns (h_t, c_t).
std::pair<std::vector<double>, std::vector<double>> lstm_cell(
    const LstmLayerParams& p, std::span<const double> x, std::span<const double> h_prev,
    std::span<const double> c_prev, Activation act = Activation::Tanh);

/// seq_len x in_channels -> seq_len x filters.
Matrix conv1d(const Conv1dLayerParams& p, const Matrix& sequence);

}  // namespace rulfdia::nn
