#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rulfdia/nn/activation.hpp"
#include "rulfdia/nn/layers.hpp"
#include "rulfdia/nn/matrix.hpp"
#include "rulfdia/random.hpp"
#include "rulfdia/sample.hpp"

namespace rulfdia::nn {

enum class ModelKind { Gru, Lstm, Cnn };

std::string_view to_string(ModelKind k);
ModelKind model_kind_from_string(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::Gru;
  std::vector<std::size_t> layer_widths;  // recurrent hidden widths or conv filter counts
  std::size_t seq_len = 80;
  double dropout_rate = 0.2;
  Activation activation = Activation::Tanh;
  std::size_t input_dim = 0;
  std::size_t kernel_len = 3;     // CNN only
  std::size_t dense_width = 100;  // CNN only: hidden width of the dense head
  // The head's linear output is multiplied by this constant so unit-scale
  // weights can reach targets measured in hundreds of cycles.
  double output_scale = 1.0;

  void validate() const;
  /// e.g. "GRU(100,100,100) lh(80)"
  std::string label() const;
  bool operator==(const ModelSpec&) const = default;
};

/// All learned weights of one model. Recurrent models use `gru` or `lstm`
/// plus one dense layer (width -> 1); CNN models use `conv` plus two dense
/// layers (seq_len * filters -> dense_width -> 1).
struct ModelParams {
  ModelSpec spec;
  std::vector<GruLayerParams> gru;
  std::vector<LstmLayerParams> lstm;
  std::vector<Conv1dLayerParams> conv;
  std::vector<DenseLayerParams> dense;

  static ModelParams zeros(const ModelSpec& spec);
  /// Every weight and bias uniform in +-1/sqrt(fan_in) of its layer.
  static ModelParams random_init(const ModelSpec& spec, Rng& rng);

  /// Visits every parameter array in a fixed order with a stable name such
  /// as "gru1.w_z" or "dense0.b".
  void for_each(const std::function<void(std::string_view, Matrix&)>& fn);
  void for_each(const std::function<void(std::string_view, const Matrix&)>& fn) const;
  std::size_t parameter_count() const;
  void set_zero();
  bool operator==(const ModelParams&) const = default;
};

enum class Mode { Train, Infer };

/// Intermediates recorded by forward() for backward().
struct LayerTape {
  Matrix input;   // T x in (after the previous layer's dropout)
  Matrix output;  // T x width (before dropout)
  Matrix mask;    // T x width dropout scale factors; empty when no dropout was applied
  // GRU: z, r, candidate. LSTM: i, f, o, candidate, c, act(c).
  Matrix g0, g1, g2, g3, g4, g5;
};

struct ForwardTape {
  std::vector<LayerTape> layers;
  std::vector<double> head_input;       // after dropout
  std::vector<double> head_hidden;      // CNN only: dense hidden after ReLU
  std::vector<double> flat_mask;        // CNN only: dropout factors on the flattened stack
  double raw_output = 0.0;
};

/// Predicted RUL for one window. `rng` supplies dropout masks and may be null
/// in inference mode or when dropout_rate is 0.
double forward(const ModelParams& params, const Matrix& window, Mode mode, Rng* rng);
double forward(const ModelParams& params, const Matrix& window, Mode mode, Rng* rng,
               ForwardTape& tape);

/// Accumulates d(output)/d(theta) * d_pred into grads, which must have the
/// same structure as params.
void backward(const ModelParams& params, const ForwardTape& tape, double d_pred,
              ModelParams& grads);

inline double loss_mse(double pred, double target) {
  const double d = pred - target;
  return d * d;
}

/// Mean squared error over the batch; grads is overwritten with the exact
/// gradient of that mean with respect to every parameter.
double batch_gradients(const ModelParams& params, std::span<const SequenceSample* const> batch,
                       Mode mode, Rng* rng, ModelParams& grads);

/// Inverted dropout: zero each element with probability `rate`, scale the
/// survivors by 1/(1-rate). Inference mode or rate 0 is the identity.
std::vector<double> dropout(std::span<const double> x, double rate, Rng& rng, bool training);

}  // namespace rulfdia::nn
