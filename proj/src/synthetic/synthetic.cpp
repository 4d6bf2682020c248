#include "rulfdia/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include "rulfdia/errors.hpp"
#include "rulfdia/random.hpp"

namespace rulfdia::synthetic {

namespace {

struct SensorModel {
  std::string_view tag;
  double base;
  double gain;   // shift reached at failure
  double noise;  // measurement sigma
  int decimals;
};

// Rough FD001 magnitudes.  Zero gain and noise makes the channel constant.
constexpr std::array<SensorModel, cmapss::kNumSensors> kSensors = {{
    {"T2", 518.67, 0.0, 0.0, 2},
    {"T24", 642.2, 1.6, 0.4, 2},
    {"T30", 1585.0, 20.0, 5.5, 2},
    {"T50", 1400.0, 30.0, 7.0, 2},
    {"P2", 14.62, 0.0, 0.0, 2},
    {"P15", 21.605, 0.0, 0.004, 2},
    {"P30", 554.2, -4.0, 0.7, 2},
    {"Nf", 2388.03, 0.3, 0.05, 2},
    {"Nc", 9050.0, 60.0, 10.0, 2},
    {"epr", 1.3, 0.0, 0.0, 2},
    {"Ps30", 47.3, 1.1, 0.2, 2},
    {"phi", 522.0, -3.5, 0.55, 2},
    {"NRf", 2388.03, 0.3, 0.05, 2},
    {"NRc", 8130.0, 55.0, 15.0, 2},
    {"BPR", 8.41, 0.15, 0.03, 4},
    {"farB", 0.03, 0.0, 0.0, 2},
    {"htBleed", 391.5, 5.0, 1.3, 0},
    {"Nf_dmd", 2388.0, 0.0, 0.0, 0},
    {"PCNfR_dmd", 100.0, 0.0, 0.0, 0},
    {"W31", 38.95, -0.7, 0.15, 2},
    {"W32", 23.37, -0.4, 0.09, 4},
}};

double round_to(double v, int decimals) {
  const double s = std::pow(10.0, decimals);
  return std::round(v * s) / s;
}

int draw_life(const SurrogateConfig& c, Rng& rng) {
  // Squared uniform skews lifetimes toward the short end, as in FD001.
  const double u = rng.uniform();
  return c.min_life + static_cast<int>(std::floor(u * u * (c.max_life - c.min_life + 1)));
}

cmapss::EngineTrajectory simulate(int engine_id, int life, int observed, Rng& rng) {
  const double tau = rng.uniform(40.0, 80.0);
  std::array<double, cmapss::kNumSensors> offset{};
  for (std::size_t s = 0; s < kSensors.size(); ++s) offset[s] = 0.5 * kSensors[s].noise * rng.normal();
  cmapss::EngineTrajectory t;
  t.engine_id = engine_id;
  for (int c = 1; c <= observed; ++c) {
    const double wear = std::exp(-static_cast<double>(life - c) / tau);
    cmapss::CycleRecord r;
    r.cycle = c;
    r.op_settings = {round_to(0.0022 * rng.normal(), 4), round_to(0.0003 * rng.normal(), 4), 100.0};
    for (std::size_t s = 0; s < kSensors.size(); ++s) {
      const auto& m = kSensors[s];
      const double v = m.base + offset[s] + m.gain * wear + m.noise * rng.normal();
      r.sensors[s] = round_to(v, m.decimals);
    }
    t.rows.push_back(r);
  }
  return t;
}

}  // namespace

SurrogateDataset generate(const SurrogateConfig& config) {
  if (config.train_engines < 1 || config.test_engines < 0 || config.min_life < 32 ||
      config.max_life < config.min_life)
    throw ValidationError("surrogate: bad engine counts or lifetime range");
  SurrogateDataset out;
  Rng train_rng(mix_seed(config.seed, "surrogate.train"));
  for (int e = 1; e <= config.train_engines; ++e) {
    const int life = draw_life(config, train_rng);
    out.train.push_back(simulate(e, life, life, train_rng));
  }
  Rng test_rng(mix_seed(config.seed, "surrogate.test"));
  for (int e = 1; e <= config.test_engines; ++e) {
    const int life = draw_life(config, test_rng);
    const int cut = std::max(31, static_cast<int>(std::round(life * test_rng.uniform(0.1, 0.95))));
    out.test.push_back(simulate(e, life, std::min(cut, life), test_rng));
    out.test_ruls.push_back(static_cast<double>(life - std::min(cut, life)));
  }
  return out;
}

}  // namespace rulfdia::synthetic
