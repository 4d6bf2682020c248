#pragma once

#include <cstdint>
#include <vector>

#include "rulfdia/cmapss.hpp"

// Stand-in for FD001 when the real files are not available: single operating
// condition, six flat channels, and the remaining sensors drifting toward
// failure along an exponential wear curve.  It exercises the whole pipeline
// but says nothing about how the models fare on the real engines.
namespace rulfdia::synthetic {

struct SurrogateConfig {
  int train_engines = 100;
  int test_engines = 100;
  int min_life = 128;
  int max_life = 362;
  std::uint64_t seed = 2024;
};

struct SurrogateDataset {
  std::vector<cmapss::EngineTrajectory> train;
  std::vector<cmapss::EngineTrajectory> test;  // truncated before failure
  std::vector<double> test_ruls;               // cycles left after the cut
};

SurrogateDataset generate(const SurrogateConfig& config);

}  // namespace rulfdia::synthetic
