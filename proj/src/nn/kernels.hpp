#pragma once

// Allocation-free step kernels shared by the public cell functions and the
// sequence forward/backward passes.

#include <span>

#include "rulfdia/nn/layers.hpp"

namespace rulfdia::nn::detail {

struct GruStepView {
  std::span<double> z, r, candidate, h;
};

/// scratch must hold at least `hidden` doubles.
void gru_forward_step(const GruLayerParams& p, std::span<const double> x,
                      std::span<const double> h_prev, Activation act, GruStepView out,
                      std::span<double> scratch);

struct GruStepGrads {
  GruLayerParams& grads;
  std::span<double> dh_prev;  // accumulated
  std::span<double> dx;       // accumulated
};

/// scratch must hold at least 5 * hidden doubles.
void gru_backward_step(const GruLayerParams& p, std::span<const double> x,
                       std::span<const double> h_prev, Activation act,
                       std::span<const double> z, std::span<const double> r,
                       std::span<const double> candidate, std::span<const double> dh,
                       GruStepGrads out, std::span<double> scratch);

struct LstmStepView {
  std::span<double> i, f, o, candidate, c, act_c, h;
};

void lstm_forward_step(const LstmLayerParams& p, std::span<const double> x,
                       std::span<const double> h_prev, std::span<const double> c_prev,
                       Activation act, LstmStepView out);

struct LstmStepGrads {
  LstmLayerParams& grads;
  std::span<double> dh_prev;  // accumulated
  std::span<double> dc_prev;  // overwritten
  std::span<double> dx;       // accumulated
};

/// dc is the gradient arriving at c_t from step t+1. scratch holds >= 4 * hidden.
void lstm_backward_step(const LstmLayerParams& p, std::span<const double> x,
                        std::span<const double> h_prev, std::span<const double> c_prev,
                        Activation act, std::span<const double> i, std::span<const double> f,
                        std::span<const double> o, std::span<const double> candidate,
                        std::span<const double> act_c, std::span<const double> dh,
                        std::span<const double> dc, LstmStepGrads out, std::span<double> scratch);

/// out: seq_len x filters after ReLU.
void conv1d_forward(const Conv1dLayerParams& p, const Matrix& in, Matrix& out);
/// d_out is the gradient w.r.t. the post-ReLU output; d_in is accumulated.
void conv1d_backward(const Conv1dLayerParams& p, const Matrix& in, const Matrix& out,
                     const Matrix& d_out, Conv1dLayerParams& grads, Matrix& d_in);

}  // namespace rulfdia::nn::detail
