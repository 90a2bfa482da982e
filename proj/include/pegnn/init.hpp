#pragma once

#include <cmath>

#include "pegnn/rng.hpp"
#include "pegnn/tensor.hpp"

namespace pegnn {

// Weight init: uniform(-s, s) with s = 1/sqrt(fan_in), trainable.
inline Tensor init_uniform(int fan_in, int fan_out, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t = Tensor::zeros(fan_in, fan_out, /*requires_grad=*/true);
  for (double& v : t.values()) v = rng.uniform(-s, s);
  return t;
}

// Bias init uses the owning layer's fan_in bound.
inline Tensor init_uniform_bias(int fan_in, int fan_out, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t = Tensor::zeros(1, fan_out, /*requires_grad=*/true);
  for (double& v : t.values()) v = rng.uniform(-s, s);
  return t;
}

}  // namespace pegnn
