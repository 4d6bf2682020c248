#pragma once

// Central finite-difference oracle for the analytic gradients. It only calls
// forward(), so it stays independent of the backward pass it checks.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "rulfdia/nn/model.hpp"
#include "rulfdia/random.hpp"

namespace testing {

struct GradCheckResult {
  std::size_t checked = 0;
  std::size_t failed = 0;
  double worst_relative_error = 0.0;
  std::string worst_coordinate;
};

inline double mean_loss(const rulfdia::nn::ModelParams& p,
                        const std::vector<rulfdia::SequenceSample>& batch) {
  double l = 0.0;
  for (const auto& s : batch)
    l += rulfdia::nn::loss_mse(rulfdia::nn::forward(p, s.window, rulfdia::nn::Mode::Infer, nullptr),
                               s.target_rul);
  return l / static_cast<double>(batch.size());
}

/// Relative error |a - n| / max(|a|, |n|). Coordinates whose gradients are
/// both below `floor` in magnitude are compared absolutely against floor * tol.
inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

/// Checks `count` random coordinates drawn from arrays whose name starts with
/// `prefix` (e.g. "gru", "lstm", "conv", "dense").
inline GradCheckResult finite_difference_check(rulfdia::nn::ModelParams params,
                                               const std::vector<rulfdia::SequenceSample>& batch,
                                               std::string_view prefix, std::size_t count,
                                               rulfdia::Rng& rng, double eps = 1e-5,
                                               double tolerance = 1e-4) {
  using namespace rulfdia::nn;
  std::vector<const rulfdia::SequenceSample*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  ModelParams grads;
  batch_gradients(params, ptrs, Mode::Infer, nullptr, grads);

  struct Coord {
    std::string name;
    Matrix* value;
    const Matrix* grad;
    std::size_t index;
  };
  std::vector<Coord> coords;
  std::vector<const Matrix*> grad_arrays;
  grads.for_each([&](std::string_view, const Matrix& m) { grad_arrays.push_back(&m); });
  std::size_t a = 0;
  params.for_each([&](std::string_view name, Matrix& m) {
    if (name.substr(0, prefix.size()) == prefix)
      for (std::size_t i = 0; i < m.size(); ++i)
        coords.push_back({std::string(name) + "[" + std::to_string(i) + "]", &m, grad_arrays[a], i});
    ++a;
  });

  GradCheckResult result;
  for (std::size_t n = 0; n < count && !coords.empty(); ++n) {
    const auto pick = rng.below(coords.size());
    auto c = coords[pick];
    coords.erase(coords.begin() + static_cast<std::ptrdiff_t>(pick));
    double& theta = c.value->values()[c.index];
    const double saved = theta;
    theta = saved + eps;
    const double plus = mean_loss(params, batch);
    theta = saved - eps;
    const double minus = mean_loss(params, batch);
    theta = saved;
    const double numeric = (plus - minus) / (2.0 * eps);
    const double analytic = c.grad->values()[c.index];
    const double err = relative_error(analytic, numeric);
    ++result.checked;
    if (!(err < tolerance)) ++result.failed;
    if (err > result.worst_relative_error || std::isnan(err)) {
      result.worst_relative_error = err;
      result.worst_coordinate = c.name;
    }
  }
  return result;
}

inline std::vector<rulfdia::SequenceSample> random_batch(const rulfdia::nn::ModelSpec& spec,
                                                         std::size_t n, rulfdia::Rng& rng) {
  std::vector<rulfdia::SequenceSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    rulfdia::nn::Matrix w(spec.seq_len, spec.input_dim);
    for (auto& v : w.values()) v = rng.uniform(-1.0, 1.5);
    out.push_back({1, static_cast<int>(spec.seq_len + i), w, rng.uniform(-1.0, 2.0)});
  }
  return out;
}

}  // namespace testing
