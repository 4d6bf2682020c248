#pragma once

#include <cmath>
#include <string>
#include <string_view>

namespace rulfdia::nn {

enum class Activation { Tanh, Relu };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

/// Logistic function, evaluated on the branch that cannot overflow.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double tanh_act(double x) { return std::tanh(x); }
inline double relu(double x) { return x > 0.0 ? x : 0.0; }

inline double activate(Activation a, double x) {
  return a == Activation::Tanh ? tanh_act(x) : relu(x);
}

// Derivatives written in terms of the activation output y = f(x).
inline double activation_grad(Activation a, double y) {
  return a == Activation::Tanh ? 1.0 - y * y : (y > 0.0 ? 1.0 : 0.0);
}
inline double sigmoid_grad(double y) { return y * (1.0 - y); }

}  // namespace rulfdia::nn
