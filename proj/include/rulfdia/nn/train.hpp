#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rulfdia/nn/model.hpp"
#include "rulfdia/nn/optimizer.hpp"
#include "rulfdia/sample.hpp"

namespace rulfdia::nn {

struct TrainConfig {
  std::size_t batch_size = 200;
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  // Trailing fraction of engines (by id) held out for the validation curve.
  double validation_fraction = 0.05;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> validation_loss;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochStats> history;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Seeded initialization, per-epoch shuffles and dropout masks are drawn from
/// independent substreams of config.seed, so (spec, samples, config) fixes the
/// result bit for bit.
TrainResult train(const ModelSpec& spec, std::span<const SequenceSample> samples,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Engine ids held out for validation: the last round(fraction * n) distinct
/// ids in ascending order, never all of them.
std::vector<int> validation_engines(std::span<const SequenceSample> samples, double fraction);

}  // namespace rulfdia::nn
