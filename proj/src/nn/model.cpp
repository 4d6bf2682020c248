#include "rulfdia/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "kernels.hpp"

namespace rulfdia::nn {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Gru: return "GRU";
    case ModelKind::Lstm: return "LSTM";
    case ModelKind::Cnn: return "CNN";
  }
  return "?";
}

ModelKind model_kind_from_string(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  if (s == "GRU") return ModelKind::Gru;
  if (s == "LSTM") return ModelKind::Lstm;
  if (s == "CNN") return ModelKind::Cnn;
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

std::string_view to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
  if (layer_widths.empty()) throw std::invalid_argument("model: layer_widths must be non-empty");
  for (auto w : layer_widths)
    if (w == 0) throw std::invalid_argument("model: layer widths must be positive");
  if (seq_len == 0) throw std::invalid_argument("model: seq_len must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw std::invalid_argument("model: dropout_rate must lie in [0, 1)");
  if (input_dim == 0) throw std::invalid_argument("model: input_dim must be positive");
  if (!std::isfinite(output_scale) || output_scale == 0.0)
    throw std::invalid_argument("model: output_scale must be finite and non-zero");
  if (kind == ModelKind::Cnn) {
    if (kernel_len == 0 || kernel_len % 2 == 0)
      throw std::invalid_argument("model: CNN kernel_len must be odd");
    if (kernel_len > seq_len) throw std::invalid_argument("model: CNN kernel_len exceeds seq_len");
    if (dense_width == 0) throw std::invalid_argument("model: CNN dense_width must be positive");
  }
}

std::string ModelSpec::label() const {
  std::ostringstream os;
  os << to_string(kind) << '(';
  for (std::size_t i = 0; i < layer_widths.size(); ++i) os << (i ? "," : "") << layer_widths[i];
  os << ") lh(" << seq_len << ')';
  return os.str();
}

// ---------------------------------------------------------------------------

ModelParams ModelParams::zeros(const ModelSpec& spec) {
  spec.validate();
  ModelParams p;
  p.spec = spec;
  std::size_t in = spec.input_dim;
  switch (spec.kind) {
    case ModelKind::Gru:
      for (auto w : spec.layer_widths) {
        p.gru.push_back(GruLayerParams::zeros(w, in));
        in = w;
      }
      p.dense.push_back(DenseLayerParams::zeros(1, in));
      break;
    case ModelKind::Lstm:
      for (auto w : spec.layer_widths) {
        p.lstm.push_back(LstmLayerParams::zeros(w, in));
        in = w;
      }
      p.dense.push_back(DenseLayerParams::zeros(1, in));
      break;
    case ModelKind::Cnn:
      for (auto w : spec.layer_widths) {
        p.conv.push_back(Conv1dLayerParams::zeros(w, spec.kernel_len, in));
        in = w;
      }
      p.dense.push_back(DenseLayerParams::zeros(spec.dense_width, spec.seq_len * in));
      p.dense.push_back(DenseLayerParams::zeros(1, spec.dense_width));
      break;
  }
  return p;
}

namespace {

void fill_uniform(Rng& rng, double bound, std::initializer_list<Matrix*> arrays) {
  for (auto* m : arrays)
    for (auto& v : m->values()) v = rng.uniform(-bound, bound);
}

}  // namespace

ModelParams ModelParams::random_init(const ModelSpec& spec, Rng& rng) {
  auto p = zeros(spec);
  for (auto& l : p.gru)
    fill_uniform(rng, 1.0 / std::sqrt(static_cast<double>(l.w_z.cols())),
                 {&l.w_z, &l.w_r, &l.w_h, &l.b_z, &l.b_r, &l.b_h});
  for (auto& l : p.lstm)
    fill_uniform(rng, 1.0 / std::sqrt(static_cast<double>(l.w_i.cols())),
                 {&l.w_i, &l.w_f, &l.w_o, &l.w_c, &l.b_i, &l.b_f, &l.b_o, &l.b_c});
  for (auto& l : p.conv)
    fill_uniform(rng, 1.0 / std::sqrt(static_cast<double>(l.kernels.cols())),
                 {&l.kernels, &l.biases});
  for (auto& l : p.dense)
    fill_uniform(rng, 1.0 / std::sqrt(static_cast<double>(l.in())), {&l.w, &l.b});
  return p;
}

void ModelParams::for_each(const std::function<void(std::string_view, Matrix&)>& fn) {
  // Only the call signature differs from the const overload.
  const auto& self = *this;
  self.for_each([&](std::string_view name, const Matrix& m) { fn(name, const_cast<Matrix&>(m)); });
}

void ModelParams::for_each(const std::function<void(std::string_view, const Matrix&)>& fn) const {
  auto name = [](const char* prefix, std::size_t i, const char* field) {
    return std::string(prefix) + std::to_string(i) + "." + field;
  };
  for (std::size_t i = 0; i < gru.size(); ++i) {
    const auto& l = gru[i];
    fn(name("gru", i, "w_z"), l.w_z);
    fn(name("gru", i, "w_r"), l.w_r);
    fn(name("gru", i, "w_h"), l.w_h);
    fn(name("gru", i, "b_z"), l.b_z);
    fn(name("gru", i, "b_r"), l.b_r);
    fn(name("gru", i, "b_h"), l.b_h);
  }
  for (std::size_t i = 0; i < lstm.size(); ++i) {
    const auto& l = lstm[i];
    fn(name("lstm", i, "w_i"), l.w_i);
    fn(name("lstm", i, "w_f"), l.w_f);
    fn(name("lstm", i, "w_o"), l.w_o);
    fn(name("lstm", i, "w_c"), l.w_c);
    fn(name("lstm", i, "b_i"), l.b_i);
    fn(name("lstm", i, "b_f"), l.b_f);
    fn(name("lstm", i, "b_o"), l.b_o);
    fn(name("lstm", i, "b_c"), l.b_c);
  }
  for (std::size_t i = 0; i < conv.size(); ++i) {
    fn(name("conv", i, "kernels"), conv[i].kernels);
    fn(name("conv", i, "biases"), conv[i].biases);
  }
  for (std::size_t i = 0; i < dense.size(); ++i) {
    fn(name("dense", i, "w"), dense[i].w);
    fn(name("dense", i, "b"), dense[i].b);
  }
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const Matrix& m) { n += m.size(); });
  return n;
}

void ModelParams::set_zero() {
  for_each([](std::string_view, Matrix& m) { m.fill(0.0); });
}

// ---------------------------------------------------------------------------

std::vector<double> dropout(std::span<const double> x, double rate, Rng& rng, bool training) {
  std::vector<double> out(x.begin(), x.end());
  if (!training || rate <= 0.0) return out;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& v : out) v = rng.uniform() < rate ? 0.0 : v * keep_scale;
  return out;
}

namespace {

void draw_mask(Matrix& mask, std::size_t rows, std::size_t cols, double rate, Rng& rng) {
  mask = Matrix(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (auto& v : mask.values()) v = rng.uniform() < rate ? 0.0 : keep_scale;
}

void run_gru_layer(const GruLayerParams& p, Activation act, LayerTape& lt) {
  const auto T = lt.input.rows();
  const auto q = p.hidden();
  lt.output = Matrix(T, q);
  lt.g0 = Matrix(T, q);
  lt.g1 = Matrix(T, q);
  lt.g2 = Matrix(T, q);
  std::vector<double> zero(q, 0.0), scratch(q);
  for (std::size_t t = 0; t < T; ++t) {
    std::span<const double> hp = t ? lt.output.row(t - 1) : std::span<const double>(zero);
    detail::gru_forward_step(p, lt.input.row(t), hp, act,
                             {lt.g0.row(t), lt.g1.row(t), lt.g2.row(t), lt.output.row(t)}, scratch);
  }
}

void run_lstm_layer(const LstmLayerParams& p, Activation act, LayerTape& lt) {
  const auto T = lt.input.rows();
  const auto q = p.hidden();
  lt.output = Matrix(T, q);
  for (auto* m : {&lt.g0, &lt.g1, &lt.g2, &lt.g3, &lt.g4, &lt.g5}) *m = Matrix(T, q);
  std::vector<double> zero(q, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    std::span<const double> hp = t ? lt.output.row(t - 1) : std::span<const double>(zero);
    std::span<const double> cp = t ? lt.g4.row(t - 1) : std::span<const double>(zero);
    detail::lstm_forward_step(p, lt.input.row(t), hp, cp, act,
                              {lt.g0.row(t), lt.g1.row(t), lt.g2.row(t), lt.g3.row(t),
                               lt.g4.row(t), lt.g5.row(t), lt.output.row(t)});
  }
}

Matrix apply_mask(const Matrix& m, const Matrix& mask) {
  if (mask.empty()) return m;
  Matrix out = m;
  auto o = out.values();
  auto k = mask.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= k[i];
  return out;
}

double dense_forward(const DenseLayerParams& d, std::span<const double> x, std::span<double> y) {
  for (std::size_t r = 0; r < d.out(); ++r) y[r] = d.b(r, 0);
  affine_concat_acc(d.w, {}, x, y);
  return y.empty() ? 0.0 : y[0];
}

}  // namespace

double forward(const ModelParams& params, const Matrix& window, Mode mode, Rng* rng) {
  ForwardTape tape;
  return forward(params, window, mode, rng, tape);
}

double forward(const ModelParams& params, const Matrix& window, Mode mode, Rng* rng,
               ForwardTape& tape) {
  const auto& spec = params.spec;
  if (window.rows() != spec.seq_len || window.cols() != spec.input_dim)
    throw ShapeError("forward: window is " + std::to_string(window.rows()) + "x" +
                     std::to_string(window.cols()) + ", model expects " +
                     std::to_string(spec.seq_len) + "x" + std::to_string(spec.input_dim));
  const bool drop = mode == Mode::Train && spec.dropout_rate > 0.0;
  if (drop && rng == nullptr) throw std::invalid_argument("forward: training mode needs an Rng");

  const std::size_t n_layers = spec.layer_widths.size();
  tape.layers.resize(n_layers);
  tape.flat_mask.clear();
  tape.head_hidden.clear();

  if (spec.kind != ModelKind::Cnn) {
    const Matrix* cur = &window;
    Matrix dropped;
    for (std::size_t l = 0; l < n_layers; ++l) {
      auto& lt = tape.layers[l];
      lt.input = *cur;
      if (spec.kind == ModelKind::Gru)
        run_gru_layer(params.gru.at(l), spec.activation, lt);
      else
        run_lstm_layer(params.lstm.at(l), spec.activation, lt);
      if (drop)
        draw_mask(lt.mask, lt.output.rows(), lt.output.cols(), spec.dropout_rate, *rng);
      else
        lt.mask = Matrix();
      dropped = apply_mask(lt.output, lt.mask);
      cur = &dropped;
    }
    auto last = cur->row(cur->rows() - 1);
    tape.head_input.assign(last.begin(), last.end());
    double y = 0.0;
    dense_forward(params.dense.at(0), tape.head_input, std::span<double>(&y, 1));
    tape.raw_output = y;
  } else {
    const Matrix* cur = &window;
    for (std::size_t l = 0; l < n_layers; ++l) {
      auto& lt = tape.layers[l];
      lt.input = *cur;
      lt.mask = Matrix();
      const auto& conv = params.conv.at(l);
      lt.output = Matrix(lt.input.rows(), conv.filters());
      detail::conv1d_forward(conv, lt.input, lt.output);
      cur = &lt.output;
    }
    auto flat = cur->values();
    tape.head_input.assign(flat.begin(), flat.end());
    if (drop) {
      tape.flat_mask.resize(flat.size());
      const double keep_scale = 1.0 / (1.0 - spec.dropout_rate);
      for (std::size_t i = 0; i < flat.size(); ++i) {
        tape.flat_mask[i] = rng->uniform() < spec.dropout_rate ? 0.0 : keep_scale;
        tape.head_input[i] *= tape.flat_mask[i];
      }
    }
    const auto& hid = params.dense.at(0);
    tape.head_hidden.assign(hid.out(), 0.0);
    dense_forward(hid, tape.head_input, tape.head_hidden);
    for (auto& v : tape.head_hidden) v = relu(v);
    double y = 0.0;
    dense_forward(params.dense.at(1), tape.head_hidden, std::span<double>(&y, 1));
    tape.raw_output = y;
  }
  return tape.raw_output * spec.output_scale;
}

namespace {

void dense_backward(const DenseLayerParams& d, std::span<const double> x,
                    std::span<const double> dy, DenseLayerParams& g, std::span<double> dx) {
  outer_concat_acc(g.w, dy, {}, x);
  for (std::size_t r = 0; r < dy.size(); ++r) g.b(r, 0) += dy[r];
  if (!dx.empty()) affine_concat_backward(d.w, dy, {}, dx);
}

Matrix gru_layer_backward(const GruLayerParams& p, Activation act, const LayerTape& lt,
                          const Matrix& d_out, GruLayerParams& g) {
  const auto T = lt.input.rows();
  const auto q = p.hidden();
  Matrix d_in(T, lt.input.cols());
  std::vector<double> zero(q, 0.0), dh(q), dh_next(q, 0.0), scratch(5 * q);
  for (std::size_t t = T; t-- > 0;) {
    auto up = d_out.row(t);
    for (std::size_t k = 0; k < q; ++k) dh[k] = up[k] + dh_next[k];
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    std::span<const double> hp = t ? lt.output.row(t - 1) : std::span<const double>(zero);
    detail::gru_backward_step(p, lt.input.row(t), hp, act, lt.g0.row(t), lt.g1.row(t),
                              lt.g2.row(t), dh, {g, dh_next, d_in.row(t)}, scratch);
  }
  return d_in;
}

Matrix lstm_layer_backward(const LstmLayerParams& p, Activation act, const LayerTape& lt,
                           const Matrix& d_out, LstmLayerParams& g) {
  const auto T = lt.input.rows();
  const auto q = p.hidden();
  Matrix d_in(T, lt.input.cols());
  std::vector<double> zero(q, 0.0), dh(q), dc(q), dh_next(q, 0.0), dc_next(q, 0.0),
      scratch(4 * q);
  for (std::size_t t = T; t-- > 0;) {
    auto up = d_out.row(t);
    for (std::size_t k = 0; k < q; ++k) dh[k] = up[k] + dh_next[k];
    dc = dc_next;
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    std::span<const double> hp = t ? lt.output.row(t - 1) : std::span<const double>(zero);
    std::span<const double> cp = t ? lt.g4.row(t - 1) : std::span<const double>(zero);
    detail::lstm_backward_step(p, lt.input.row(t), hp, cp, act, lt.g0.row(t), lt.g1.row(t),
                               lt.g2.row(t), lt.g3.row(t), lt.g5.row(t), dh, dc,
                               {g, dh_next, dc_next, d_in.row(t)}, scratch);
  }
  return d_in;
}

}  // namespace

void backward(const ModelParams& params, const ForwardTape& tape, double d_pred,
              ModelParams& grads) {
  const auto& spec = params.spec;
  const double d_raw = d_pred * spec.output_scale;
  const std::size_t n_layers = spec.layer_widths.size();
  if (tape.layers.size() != n_layers) throw std::invalid_argument("backward: tape does not match model");

  Matrix d_cur;
  if (spec.kind != ModelKind::Cnn) {
    std::vector<double> d_last(tape.head_input.size(), 0.0);
    dense_backward(params.dense[0], tape.head_input, std::span<const double>(&d_raw, 1),
                   grads.dense[0], d_last);
    const auto& top = tape.layers.back();
    d_cur = Matrix(top.output.rows(), top.output.cols());
    std::copy(d_last.begin(), d_last.end(), d_cur.row(d_cur.rows() - 1).begin());
    for (std::size_t l = n_layers; l-- > 0;) {
      const auto& lt = tape.layers[l];
      Matrix d_out = apply_mask(d_cur, lt.mask);
      if (spec.kind == ModelKind::Gru)
        d_cur = gru_layer_backward(params.gru[l], spec.activation, lt, d_out, grads.gru[l]);
      else
        d_cur = lstm_layer_backward(params.lstm[l], spec.activation, lt, d_out, grads.lstm[l]);
    }
  } else {
    const auto& hid = params.dense[0];
    std::vector<double> d_hidden(hid.out(), 0.0);
    dense_backward(params.dense[1], tape.head_hidden, std::span<const double>(&d_raw, 1),
                   grads.dense[1], d_hidden);
    for (std::size_t k = 0; k < d_hidden.size(); ++k)
      if (tape.head_hidden[k] <= 0.0) d_hidden[k] = 0.0;
    std::vector<double> d_flat(tape.head_input.size(), 0.0);
    dense_backward(hid, tape.head_input, d_hidden, grads.dense[0], d_flat);
    if (!tape.flat_mask.empty())
      for (std::size_t i = 0; i < d_flat.size(); ++i) d_flat[i] *= tape.flat_mask[i];
    const auto& top = tape.layers.back();
    d_cur = Matrix(top.output.rows(), top.output.cols());
    std::copy(d_flat.begin(), d_flat.end(), d_cur.values().begin());
    for (std::size_t l = n_layers; l-- > 0;) {
      const auto& lt = tape.layers[l];
      Matrix d_in(lt.input.rows(), lt.input.cols());
      detail::conv1d_backward(params.conv[l], lt.input, lt.output, d_cur, grads.conv[l], d_in);
      d_cur = std::move(d_in);
    }
  }
}

double batch_gradients(const ModelParams& params, std::span<const SequenceSample* const> batch,
                       Mode mode, Rng* rng, ModelParams& grads) {
  if (batch.empty()) throw std::invalid_argument("batch_gradients: empty batch");
  if (!(grads.spec == params.spec))
    grads = ModelParams::zeros(params.spec);
  else
    grads.set_zero();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  ForwardTape tape;
  for (const auto* s : batch) {
    const double pred = forward(params, s->window, mode, rng, tape);
    loss += loss_mse(pred, s->target_rul);
    backward(params, tape, 2.0 * (pred - s->target_rul) * inv_n, grads);
  }
  return loss * inv_n;
}

}  // namespace rulfdia::nn
