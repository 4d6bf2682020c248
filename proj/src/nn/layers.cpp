#include "rulfdia/nn/layers.hpp"

#include <algorithm>
#include <string>

#include "kernels.hpp"

namespace rulfdia::nn {

namespace {

void check_gate(const Matrix& w, const Matrix& b, std::size_t hidden, std::size_t cols,
                const char* name) {
  if (w.rows() != hidden || w.cols() != cols || b.rows() != hidden || b.cols() != 1)
    throw ShapeError(std::string(name) + ": inconsistent gate shapes");
}

void check_step_inputs(std::size_t hidden, std::size_t input, std::size_t x, std::size_t h,
                       const char* name) {
  if (x != input || h != hidden)
    throw ShapeError(std::string(name) + ": expected x of " + std::to_string(input) +
                     " and state of " + std::to_string(hidden) + ", got " + std::to_string(x) +
                     " and " + std::to_string(h));
}

}  // namespace

GruLayerParams GruLayerParams::zeros(std::size_t hidden, std::size_t input) {
  const auto cols = hidden + input;
  return {Matrix(hidden, cols), Matrix(hidden, cols), Matrix(hidden, cols),
          Matrix(hidden, 1),    Matrix(hidden, 1),    Matrix(hidden, 1)};
}

void GruLayerParams::check_shapes() const {
  const auto q = hidden();
  const auto cols = w_z.cols();
  check_gate(w_z, b_z, q, cols, "GRU z");
  check_gate(w_r, b_r, q, cols, "GRU r");
  check_gate(w_h, b_h, q, cols, "GRU h");
  if (cols <= q) throw ShapeError("GRU: input width must be positive");
}

LstmLayerParams LstmLayerParams::zeros(std::size_t hidden, std::size_t input) {
  const auto cols = hidden + input;
  return {Matrix(hidden, cols), Matrix(hidden, cols), Matrix(hidden, cols), Matrix(hidden, cols),
          Matrix(hidden, 1),    Matrix(hidden, 1),    Matrix(hidden, 1),    Matrix(hidden, 1)};
}

void LstmLayerParams::check_shapes() const {
  const auto q = hidden();
  const auto cols = w_i.cols();
  check_gate(w_i, b_i, q, cols, "LSTM i");
  check_gate(w_f, b_f, q, cols, "LSTM f");
  check_gate(w_o, b_o, q, cols, "LSTM o");
  check_gate(w_c, b_c, q, cols, "LSTM c");
  if (cols <= q) throw ShapeError("LSTM: input width must be positive");
}

Conv1dLayerParams Conv1dLayerParams::zeros(std::size_t filters, std::size_t kernel_len,
                                           std::size_t in_channels) {
  return {Matrix(filters, kernel_len * in_channels), Matrix(filters, 1), kernel_len};
}

void Conv1dLayerParams::check_shapes() const {
  if (kernel_len == 0 || kernel_len % 2 == 0) throw ShapeError("Conv1d: kernel_len must be odd");
  if (kernels.cols() % kernel_len != 0 || kernels.rows() != biases.rows() || biases.cols() != 1)
    throw ShapeError("Conv1d: inconsistent kernel shapes");
}

DenseLayerParams DenseLayerParams::zeros(std::size_t out, std::size_t in) {
  return {Matrix(out, in), Matrix(out, 1)};
}

void DenseLayerParams::check_shapes() const {
  if (b.rows() != w.rows() || b.cols() != 1) throw ShapeError("Dense: inconsistent shapes");
}

GruStep gru_step(const GruLayerParams& p, std::span<const double> x, std::span<const double> h_prev,
                 Activation act) {
  p.check_shapes();
  const auto q = p.hidden();
  check_step_inputs(q, p.input(), x.size(), h_prev.size(), "gru_cell");
  GruStep s{std::vector<double>(q), std::vector<double>(q), std::vector<double>(q),
            std::vector<double>(q)};
  std::vector<double> scratch(q);
  detail::gru_forward_step(p, x, h_prev, act, {s.z, s.r, s.candidate, s.h}, scratch);
  return s;
}

std::vector<double> gru_cell(const GruLayerParams& p, std::span<const double> x,
                             std::span<const double> h_prev, Activation act) {
  return gru_step(p, x, h_prev, act).h;
}

LstmStep lstm_step(const LstmLayerParams& p, std::span<const double> x,
                   std::span<const double> h_prev, std::span<const double> c_prev,
                   Activation act) {
  p.check_shapes();
  const auto q = p.hidden();
  check_step_inputs(q, p.input(), x.size(), h_prev.size(), "lstm_cell");
  if (c_prev.size() != q) throw ShapeError("lstm_cell: cell state width mismatch");
  LstmStep s;
  for (auto* v : {&s.i, &s.f, &s.o, &s.candidate, &s.c, &s.h}) v->assign(q, 0.0);
  std::vector<double> act_c(q);
  detail::lstm_forward_step(p, x, h_prev, c_prev, act, {s.i, s.f, s.o, s.candidate, s.c, act_c, s.h});
  return s;
}

std::pair<std::vector<double>, std::vector<double>> lstm_cell(
    const LstmLayerParams& p, std::span<const double> x, std::span<const double> h_prev,
    std::span<const double> c_prev, Activation act) {
  auto s = lstm_step(p, x, h_prev, c_prev, act);
  return {std::move(s.h), std::move(s.c)};
}

Matrix conv1d(const Conv1dLayerParams& p, const Matrix& sequence) {
  p.check_shapes();
  if (sequence.cols() != p.in_channels())
    throw ShapeError("conv1d: expected " + std::to_string(p.in_channels()) + " channels, got " +
                     std::to_string(sequence.cols()));
  if (p.kernel_len > sequence.rows()) throw ShapeError("conv1d: kernel longer than sequence");
  Matrix out(sequence.rows(), p.filters());
  detail::conv1d_forward(p, sequence, out);
  return out;
}

// ---------------------------------------------------------------------------

namespace detail {

void gru_forward_step(const GruLayerParams& p, std::span<const double> x,
                      std::span<const double> h_prev, Activation act, GruStepView out,
                      std::span<double> scratch) {
  const auto q = p.hidden();
  for (std::size_t k = 0; k < q; ++k) {
    out.z[k] = p.b_z(k, 0);
    out.r[k] = p.b_r(k, 0);
    out.candidate[k] = p.b_h(k, 0);
  }
  affine_concat_acc(p.w_z, h_prev, x, out.z);
  affine_concat_acc(p.w_r, h_prev, x, out.r);
  auto rh = scratch.first(q);
  for (std::size_t k = 0; k < q; ++k) {
    out.z[k] = sigmoid(out.z[k]);
    out.r[k] = sigmoid(out.r[k]);
    rh[k] = out.r[k] * h_prev[k];
  }
  affine_concat_acc(p.w_h, rh, x, out.candidate);
  for (std::size_t k = 0; k < q; ++k) {
    out.candidate[k] = activate(act, out.candidate[k]);
    out.h[k] = (1.0 - out.z[k]) * h_prev[k] + out.z[k] * out.candidate[k];
  }
}

void gru_backward_step(const GruLayerParams& p, std::span<const double> x,
                       std::span<const double> h_prev, Activation act,
                       std::span<const double> z, std::span<const double> r,
                       std::span<const double> candidate, std::span<const double> dh,
                       GruStepGrads out, std::span<double> scratch) {
  const auto q = p.hidden();
  auto da_h = scratch.subspan(0, q);
  auto da_z = scratch.subspan(q, q);
  auto da_r = scratch.subspan(2 * q, q);
  auto rh = scratch.subspan(3 * q, q);
  auto drh = scratch.subspan(4 * q, q);
  for (std::size_t k = 0; k < q; ++k) {
    const double dcand = dh[k] * z[k];
    const double dz = dh[k] * (candidate[k] - h_prev[k]);
    out.dh_prev[k] += dh[k] * (1.0 - z[k]);
    da_h[k] = dcand * activation_grad(act, candidate[k]);
    da_z[k] = dz * sigmoid_grad(z[k]);
    rh[k] = r[k] * h_prev[k];
    drh[k] = 0.0;
  }
  outer_concat_acc(out.grads.w_h, da_h, rh, x);
  affine_concat_backward(p.w_h, da_h, drh, out.dx);
  for (std::size_t k = 0; k < q; ++k) {
    out.grads.b_h(k, 0) += da_h[k];
    out.grads.b_z(k, 0) += da_z[k];
    out.dh_prev[k] += drh[k] * r[k];
    da_r[k] = drh[k] * h_prev[k] * sigmoid_grad(r[k]);
    out.grads.b_r(k, 0) += da_r[k];
  }
  outer_concat_acc(out.grads.w_z, da_z, h_prev, x);
  outer_concat_acc(out.grads.w_r, da_r, h_prev, x);
  affine_concat_backward(p.w_z, da_z, out.dh_prev, out.dx);
  affine_concat_backward(p.w_r, da_r, out.dh_prev, out.dx);
}

void lstm_forward_step(const LstmLayerParams& p, std::span<const double> x,
                       std::span<const double> h_prev, std::span<const double> c_prev,
                       Activation act, LstmStepView out) {
  const auto q = p.hidden();
  for (std::size_t k = 0; k < q; ++k) {
    out.i[k] = p.b_i(k, 0);
    out.f[k] = p.b_f(k, 0);
    out.o[k] = p.b_o(k, 0);
    out.candidate[k] = p.b_c(k, 0);
  }
  affine_concat_acc(p.w_i, h_prev, x, out.i);
  affine_concat_acc(p.w_f, h_prev, x, out.f);
  affine_concat_acc(p.w_o, h_prev, x, out.o);
  affine_concat_acc(p.w_c, h_prev, x, out.candidate);
  for (std::size_t k = 0; k < q; ++k) {
    out.i[k] = sigmoid(out.i[k]);
    out.f[k] = sigmoid(out.f[k]);
    out.o[k] = sigmoid(out.o[k]);
    out.candidate[k] = activate(act, out.candidate[k]);
    out.c[k] = out.f[k] * c_prev[k] + out.i[k] * out.candidate[k];
    out.act_c[k] = activate(act, out.c[k]);
    out.h[k] = out.o[k] * out.act_c[k];
  }
}

void lstm_backward_step(const LstmLayerParams& p, std::span<const double> x,
                        std::span<const double> h_prev, std::span<const double> c_prev,
                        Activation act, std::span<const double> i, std::span<const double> f,
                        std::span<const double> o, std::span<const double> candidate,
                        std::span<const double> act_c, std::span<const double> dh,
                        std::span<const double> dc, LstmStepGrads out, std::span<double> scratch) {
  const auto q = p.hidden();
  auto da_i = scratch.subspan(0, q);
  auto da_f = scratch.subspan(q, q);
  auto da_o = scratch.subspan(2 * q, q);
  auto da_c = scratch.subspan(3 * q, q);
  for (std::size_t k = 0; k < q; ++k) {
    const double d_o = dh[k] * act_c[k];
    const double d_c = dc[k] + dh[k] * o[k] * activation_grad(act, act_c[k]);
    da_i[k] = d_c * candidate[k] * sigmoid_grad(i[k]);
    da_f[k] = d_c * c_prev[k] * sigmoid_grad(f[k]);
    da_o[k] = d_o * sigmoid_grad(o[k]);
    da_c[k] = d_c * i[k] * activation_grad(act, candidate[k]);
    out.dc_prev[k] = d_c * f[k];
    out.grads.b_i(k, 0) += da_i[k];
    out.grads.b_f(k, 0) += da_f[k];
    out.grads.b_o(k, 0) += da_o[k];
    out.grads.b_c(k, 0) += da_c[k];
  }
  outer_concat_acc(out.grads.w_i, da_i, h_prev, x);
  outer_concat_acc(out.grads.w_f, da_f, h_prev, x);
  outer_concat_acc(out.grads.w_o, da_o, h_prev, x);
  outer_concat_acc(out.grads.w_c, da_c, h_prev, x);
  affine_concat_backward(p.w_i, da_i, out.dh_prev, out.dx);
  affine_concat_backward(p.w_f, da_f, out.dh_prev, out.dx);
  affine_concat_backward(p.w_o, da_o, out.dh_prev, out.dx);
  affine_concat_backward(p.w_c, da_c, out.dh_prev, out.dx);
}

void conv1d_forward(const Conv1dLayerParams& p, const Matrix& in, Matrix& out) {
  const auto T = in.rows();
  const auto C = in.cols();
  const auto K = p.kernel_len;
  const auto half = static_cast<std::ptrdiff_t>(K / 2);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < p.filters(); ++f) {
      double acc = p.biases(f, 0);
      const double* w = p.kernels.row(f).data();
      for (std::size_t k = 0; k < K; ++k) {
        const auto src = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(k) - half;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
        const double* x = in.row(static_cast<std::size_t>(src)).data();
        const double* wk = w + k * C;
        for (std::size_t c = 0; c < C; ++c) acc += wk[c] * x[c];
      }
      out(t, f) = relu(acc);
    }
  }
}

void conv1d_backward(const Conv1dLayerParams& p, const Matrix& in, const Matrix& out,
                     const Matrix& d_out, Conv1dLayerParams& grads, Matrix& d_in) {
  const auto T = in.rows();
  const auto C = in.cols();
  const auto K = p.kernel_len;
  const auto half = static_cast<std::ptrdiff_t>(K / 2);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t f = 0; f < p.filters(); ++f) {
      if (out(t, f) <= 0.0) continue;
      const double g = d_out(t, f);
      if (g == 0.0) continue;
      grads.biases(f, 0) += g;
      const double* w = p.kernels.row(f).data();
      double* gw = grads.kernels.row(f).data();
      for (std::size_t k = 0; k < K; ++k) {
        const auto src = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(k) - half;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(T)) continue;
        const auto s = static_cast<std::size_t>(src);
        const double* x = in.row(s).data();
        double* dx = d_in.row(s).data();
        for (std::size_t c = 0; c < C; ++c) {
          gw[k * C + c] += g * x[c];
          dx[c] += g * w[k * C + c];
        }
      }
    }
  }
}

}  // namespace detail
}  // namespace rulfdia::nn
