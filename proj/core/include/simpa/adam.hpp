#pragma once

#include <cmath>
#include <cstddef>

#include "simpa/tensor.hpp"

namespace simpa {

// Adam with bias correction; update() descends, so callers negate the
// gradient for ascent.
struct AdamState {
  Tensor m, v;
  std::size_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void init(std::size_t n) {
    m = Tensor({n});
    v = Tensor({n});
    step = 0;
  }

  void update(Tensor& params, const Tensor& grad, double lr) {
    if (m.size() != params.size()) init(params.size());
    ++step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grad[i];
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
};

}  // namespace simpa
