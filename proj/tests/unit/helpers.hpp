#pragma once

#include <sstream>
#include <string>

#include "rulfdia/cmapss.hpp"
#include "rulfdia/random.hpp"

namespace testing {

/// A trajectory whose every channel follows base + slope * cycle, plus an
/// optional per-cell jitter from rng.
inline rulfdia::cmapss::EngineTrajectory ramp_trajectory(int engine_id, int length,
                                                          double slope = 0.01,
                                                          rulfdia::Rng* rng = nullptr) {
  using namespace rulfdia::cmapss;
  EngineTrajectory t;
  t.engine_id = engine_id;
  for (int c = 1; c <= length; ++c) {
    CycleRecord r;
    r.cycle = c;
    for (std::size_t ch = 0; ch < kNumChannels; ++ch) {
      double v = 100.0 + 10.0 * static_cast<double>(ch) + slope * c;
      if (rng) v += rng->uniform(-0.5, 0.5);
      if (ch < kNumSettings)
        r.op_settings[ch] = v;
      else
        r.sensors[ch - kNumSettings] = v;
    }
    t.rows.push_back(r);
  }
  return t;
}

inline std::string row_text(int engine, int cycle, double fill = 1.0) {
  std::ostringstream os;
  os << engine << ' ' << cycle;
  for (int i = 0; i < 24; ++i) os << ' ' << fill + i;
  os << '\n';
  return os.str();
}

}  // namespace testing
