#include "charlstm/optim.hpp"

#include <cmath>

#include "charlstm/error.hpp"

namespace charlstm {

AdamState adam_init(const ModelParams& shape, const AdamConfig& cfg) {
  require(cfg.alpha > 0.0, "adam_init: alpha must be > 0");
  require(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0, "adam_init: beta1 must be in [0, 1)");
  require(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0, "adam_init: beta2 must be in [0, 1)");
  require(cfg.eps > 0.0, "adam_init: eps must be > 0");
  AdamState s;
  s.t = 0;
  s.m = zero_gradients(shape);
  s.v = zero_gradients(shape);
  s.cfg = cfg;
  return s;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state) {
  require(params.vocab == grads.vocab && params.hidden == grads.hidden,
          "adam_step: gradient shape mismatch");
  bool finite = true;
  for_each_tensor(grads, [&](const std::vector<double>& t) {
    if (finite && !all_finite(t)) finite = false;
  });
  require(finite, "adam_step: non-finite gradient");

  state.t += 1;
  const AdamConfig& c = state.cfg;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));

  std::vector<const std::vector<double>*> gs;
  std::vector<std::vector<double>*> ps, ms, vs;
  for_each_tensor(params, [&](std::vector<double>& t) { ps.push_back(&t); });
  for_each_tensor(grads, [&](const std::vector<double>& t) { gs.push_back(&t); });
  for_each_tensor(state.m, [&](std::vector<double>& t) { ms.push_back(&t); });
  for_each_tensor(state.v, [&](std::vector<double>& t) { vs.push_back(&t); });

  for (std::size_t ti = 0; ti < ps.size(); ++ti) {
    require(gs[ti]->size() == ps[ti]->size(), "adam_step: tensor size mismatch");
    double* p = ps[ti]->data();
    const double* gr = gs[ti]->data();
    double* m = ms[ti]->data();
    double* v = vs[ti]->data();
    const std::size_t n = ps[ti]->size();
    for (std::size_t k = 0; k < n; ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * gr[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * gr[k] * gr[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      p[k] -= c.alpha * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

}  // namespace charlstm
