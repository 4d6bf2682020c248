#include "rulfdia/nn/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rulfdia::nn {

AdamOptimizer::AdamOptimizer(const ModelParams& like, AdamConfig config)
    : config_(config), m_(ModelParams::zeros(like.spec)), v_(ModelParams::zeros(like.spec)) {
  if (!(config_.learning_rate > 0.0)) throw std::invalid_argument("adam: learning_rate must be > 0");
}

namespace {

std::vector<Matrix*> arrays(ModelParams& p) {
  std::vector<Matrix*> out;
  p.for_each([&](std::string_view, Matrix& m) { out.push_back(&m); });
  return out;
}

}  // namespace

void AdamOptimizer::step(ModelParams& params, const ModelParams& grads) {
  std::vector<const Matrix*> g;
  std::vector<std::string> names;
  grads.for_each([&](std::string_view name, const Matrix& m) {
    g.push_back(&m);
    names.emplace_back(name);
  });
  auto p = arrays(params);
  auto m = arrays(m_);
  auto v = arrays(v_);
  if (g.size() != p.size()) throw ShapeError("adam: gradient structure does not match parameters");
  for (std::size_t a = 0; a < g.size(); ++a) {
    require_same_shape(*p[a], *g[a], "adam");
    for (double x : g[a]->values())
      if (!std::isfinite(x)) throw std::domain_error("adam: non-finite gradient in " + names[a]);
  }

  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t a = 0; a < g.size(); ++a) {
    auto pv = p[a]->values();
    auto gv = g[a]->values();
    auto mv = m[a]->values();
    auto vv = v[a]->values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = b1 * mv[i] + (1.0 - b1) * gv[i];
      vv[i] = b2 * vv[i] + (1.0 - b2) * gv[i] * gv[i];
      const double m_hat = mv[i] / c1;
      const double v_hat = vv[i] / c2;
      pv[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace rulfdia::nn
