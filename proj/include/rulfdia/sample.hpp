#pragma once

#include "rulfdia/nn/matrix.hpp"

namespace rulfdia {

/// One model input: the seq_len x feature_dim window ending at end_cycle, and
/// the RUL label of that last row.
struct SequenceSample {
  int engine_id = 0;
  int end_cycle = 0;
  nn::Matrix window;
  double target_rul = 0.0;
};

}  // namespace rulfdia
