#include "rulfdia/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace rulfdia::nn {

void TrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("train: batch_size must be >= 1");
  if (epochs == 0) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("train: learning_rate must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("train: validation_fraction must lie in [0, 1)");
}

std::vector<int> validation_engines(std::span<const SequenceSample> samples, double fraction) {
  std::set<int> ids;
  for (const auto& s : samples) ids.insert(s.engine_id);
  auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
  if (n_val >= ids.size()) n_val = ids.size() ? ids.size() - 1 : 0;
  std::vector<int> out(std::prev(ids.end(), static_cast<std::ptrdiff_t>(n_val)), ids.end());
  return out;
}

TrainResult train(const ModelSpec& spec, std::span<const SequenceSample> samples,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  spec.validate();
  config.validate();
  if (samples.empty()) throw std::invalid_argument("train: no training samples");

  const auto held_out = validation_engines(samples, config.validation_fraction);
  std::vector<const SequenceSample*> fit, val;
  for (const auto& s : samples) {
    if (s.window.rows() != spec.seq_len || s.window.cols() != spec.input_dim)
      throw ShapeError("train: sample window does not match the model spec");
    const bool is_val = std::binary_search(held_out.begin(), held_out.end(), s.engine_id);
    (is_val ? val : fit).push_back(&s);
  }

  Rng init_rng(mix_seed(config.seed, "init"));
  Rng shuffle_rng(mix_seed(config.seed, "shuffle"));
  Rng dropout_rng(mix_seed(config.seed, "dropout"));

  TrainResult result;
  result.params = ModelParams::random_init(spec, init_rng);
  AdamOptimizer adam(result.params, AdamConfig{.learning_rate = config.learning_rate});
  ModelParams grads = ModelParams::zeros(spec);

  std::vector<std::size_t> order(fit.size());
  std::vector<const SequenceSample*> batch;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Fisher-Yates with our own index draw so shuffles match across standard libraries.
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const auto end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(fit[order[i]]);
      const double loss = batch_gradients(result.params, batch, Mode::Train, &dropout_rng, grads);
      loss_sum += loss * static_cast<double>(batch.size());
      adam.step(result.params, grads);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(fit.size());
    if (!val.empty()) {
      double v = 0.0;
      for (const auto* s : val)
        v += loss_mse(forward(result.params, s->window, Mode::Infer, nullptr), s->target_rul);
      stats.validation_loss = v / static_cast<double>(val.size());
    }
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

}  // namespace rulfdia::nn
