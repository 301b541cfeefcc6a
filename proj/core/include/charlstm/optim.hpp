#pragma once

// Adam over the full parameter set, learned initial states included.

#include <cstddef>

#include "charlstm/model.hpp"

namespace charlstm {

struct AdamConfig {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::size_t t = 0;   // completed steps
  ModelParams m;       // first moments, parameter-shaped
  ModelParams v;       // second moments, parameter-shaped
  AdamConfig cfg;
};

AdamState adam_init(const ModelParams& shape, const AdamConfig& cfg = {});

// t += 1; m,v decay toward g and g^2; theta -= alpha * m_hat / (sqrt(v_hat) + eps)
// with the usual 1/(1 - beta^t) bias corrections.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state);

}  // namespace charlstm
