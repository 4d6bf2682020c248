#pragma once

#include <cstddef>

#include "rulfdia/nn/model.hpp"

namespace rulfdia::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adaptive-moment optimizer with bias-corrected first and second moments.
class AdamOptimizer {
 public:
  AdamOptimizer(const ModelParams& like, AdamConfig config);

  /// Throws std::domain_error naming the parameter if any gradient is not finite;
  /// params are left untouched in that case.
  void step(ModelParams& params, const ModelParams& grads);

  std::size_t steps_taken() const noexcept { return t_; }
  const AdamConfig& config() const noexcept { return config_; }

 private:
  AdamConfig config_;
  ModelParams m_;
  ModelParams v_;
  std::size_t t_ = 0;
};

}  // namespace rulfdia::nn
