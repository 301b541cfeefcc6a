#include "charlstm/model.hpp"

#include <cmath>
#include <string>

#include "charlstm/error.hpp"

namespace charlstm {

namespace {
constexpr double kProbFloor = 1e-12;
}

ModelParams::ModelParams(std::size_t V, std::size_t H)
    : vocab(V),
      hidden(H),
      Wi(H, V), Wf(H, V), Wo(H, V), Wg(H, V),
      Ui(H, H), Uf(H, H), Uo(H, H), Ug(H, H),
      bi(H, 0.0), bf(H, 0.0), bo(H, 0.0), bg(H, 0.0),
      Wy(V, H),
      by(V, 0.0),
      h0(H, 0.0), c0(H, 0.0) {}

std::size_t ModelParams::count() const {
  std::size_t n = 0;
  for_each_tensor(*this, [&](const std::vector<double>& t) { n += t.size(); });
  return n;
}

double ForwardTrace::mean_loss() const {
  require(!losses.empty(), "mean_loss: trace has no recorded losses");
  double s = 0.0;
  for (double l : losses) s += l;
  return s / static_cast<double>(losses.size());
}

ModelParams init_params(std::uint64_t seed, std::size_t V, std::size_t H) {
  require(V >= 2, "init_params: vocabulary size must be >= 2");
  require(H >= 1, "init_params: hidden size must be >= 1");
  ModelParams p(V, H);
  Rng rng(seed);
  const double s_in = 1.0 / std::sqrt(static_cast<double>(V));
  const double s_rec = 1.0 / std::sqrt(static_cast<double>(H));
  auto fill_uniform = [&](Matrix& m, double s) {
    for (double& w : m.data) w = rng.uniform_real(-s, s);
  };
  fill_uniform(p.Wi, s_in);
  fill_uniform(p.Wf, s_in);
  fill_uniform(p.Wo, s_in);
  fill_uniform(p.Wg, s_in);
  fill_uniform(p.Ui, s_rec);
  fill_uniform(p.Uf, s_rec);
  fill_uniform(p.Uo, s_rec);
  fill_uniform(p.Ug, s_rec);
  fill_uniform(p.Wy, s_rec);
  return p;
}

Gradients zero_gradients(const ModelParams& shape) {
  return ModelParams(shape.vocab, shape.hidden);
}

LstmState lstm_step(const ModelParams& params, const LstmState& state, int x) {
  require(x >= 0 && static_cast<std::size_t>(x) < params.vocab,
          "lstm_step: character index " + std::to_string(x) + " out of range");
  require(state.h.size() == params.hidden && state.c.size() == params.hidden,
          "lstm_step: state size mismatch");
  const std::size_t H = params.hidden;
  const std::size_t xi = static_cast<std::size_t>(x);

  Vector ai = params.bi, af = params.bf, ao = params.bo, ag = params.bg;
  add_column(ai, params.Wi, xi);
  add_column(af, params.Wf, xi);
  add_column(ao, params.Wo, xi);
  add_column(ag, params.Wg, xi);
  matvec_add(ai, params.Ui, state.h);
  matvec_add(af, params.Uf, state.h);
  matvec_add(ao, params.Uo, state.h);
  matvec_add(ag, params.Ug, state.h);

  LstmState next(H);
  for (std::size_t j = 0; j < H; ++j) {
    const double i = sigmoid(ai[j]);
    const double f = sigmoid(af[j]);
    const double o = sigmoid(ao[j]);
    const double g = std::tanh(ag[j]);
    const double c = f * state.c[j] + i * g;
    next.c[j] = c;
    next.h[j] = o * std::tanh(c);
  }
  return next;
}

double cross_entropy(const Vector& probs, int target) {
  require(target >= 0 && static_cast<std::size_t>(target) < probs.size(),
          "cross_entropy: target out of range");
  const double p = probs[static_cast<std::size_t>(target)];
  return -std::log(p > kProbFloor ? p : kProbFloor);
}

ForwardTrace forward_window(const ModelParams& params, const LstmState& state0,
                            std::span<const int> chars,
                            std::span<const std::size_t> loss_positions,
                            std::span<const int> targets, StateOrigin origin) {
  require(!chars.empty(), "forward_window: empty window");
  require(state0.h.size() == params.hidden && state0.c.size() == params.hidden,
          "forward_window: state size mismatch");
  for (std::size_t j = 1; j < loss_positions.size(); ++j)
    require(loss_positions[j - 1] < loss_positions[j],
            "forward_window: loss positions must be strictly ascending");

  const std::size_t H = params.hidden;
  const std::size_t T = chars.size();

  ForwardTrace trace;
  trace.inputs.assign(chars.begin(), chars.end());
  trace.state0 = state0;
  trace.state0_origin = origin;
  trace.steps.resize(T);
  trace.loss_positions.assign(loss_positions.begin(), loss_positions.end());

  Vector ai(H), af(H), ao(H), ag(H);
  const Vector* h_prev = &state0.h;
  const Vector* c_prev = &state0.c;
  std::size_t next_loss = 0;

  for (std::size_t t = 0; t < T; ++t) {
    const int x = chars[t];
    require(x >= 0 && static_cast<std::size_t>(x) < params.vocab,
            "forward_window: character index out of range");
    const std::size_t xi = static_cast<std::size_t>(x);

    ai = params.bi; af = params.bf; ao = params.bo; ag = params.bg;
    add_column(ai, params.Wi, xi);
    add_column(af, params.Wf, xi);
    add_column(ao, params.Wo, xi);
    add_column(ag, params.Wg, xi);
    matvec_add(ai, params.Ui, *h_prev);
    matvec_add(af, params.Uf, *h_prev);
    matvec_add(ao, params.Uo, *h_prev);
    matvec_add(ag, params.Ug, *h_prev);

    StepTrace& st = trace.steps[t];
    st.i.resize(H); st.f.resize(H); st.o.resize(H); st.g.resize(H);
    st.c.resize(H); st.h.resize(H);
    for (std::size_t j = 0; j < H; ++j) {
      st.i[j] = sigmoid(ai[j]);
      st.f[j] = sigmoid(af[j]);
      st.o[j] = sigmoid(ao[j]);
      st.g[j] = std::tanh(ag[j]);
      const double c = st.f[j] * (*c_prev)[j] + st.i[j] * st.g[j];
      st.c[j] = c;
      st.h[j] = st.o[j] * std::tanh(c);
    }

    if (next_loss < loss_positions.size() && loss_positions[next_loss] == t) {
      require(t < targets.size(),
              "forward_window: missing target at loss position " + std::to_string(t));
      const int y = targets[t];
      require(y >= 0 && static_cast<std::size_t>(y) < params.vocab,
              "forward_window: target index out of range");
      Vector z = params.by;
      matvec_add(z, params.Wy, st.h);
      Vector p = softmax(z);
      trace.losses.push_back(cross_entropy(p, y));
      trace.loss_targets.push_back(y);
      trace.logits.push_back(std::move(z));
      trace.probs.push_back(std::move(p));
      ++next_loss;
    }

    h_prev = &st.h;
    c_prev = &st.c;
  }
  require(next_loss == loss_positions.size(),
          "forward_window: loss position beyond window length");
  return trace;
}

Gradients backward_window(const ModelParams& params, const ForwardTrace& trace) {
  Gradients g = zero_gradients(params);
  accumulate_window_gradients(params, trace, g);
  return g;
}

void accumulate_window_gradients(const ModelParams& params, const ForwardTrace& trace,
                                 Gradients& g) {
  require(!trace.steps.empty(), "backward_window: empty trace");
  require(!trace.losses.empty(), "backward_window: trace has no losses");
  require(trace.steps[0].h.size() == params.hidden,
          "backward_window: trace/params hidden size mismatch");
  require(trace.probs[0].size() == params.vocab,
          "backward_window: trace/params vocab size mismatch");
  require(trace.state0.h.size() == params.hidden,
          "backward_window: trace state size mismatch");
  require(g.vocab == params.vocab && g.hidden == params.hidden,
          "backward_window: accumulator shape mismatch");

  const std::size_t H = params.hidden;
  const std::size_t T = trace.steps.size();
  const double inv_n = 1.0 / static_cast<double>(trace.losses.size());

  Vector dh(H, 0.0), dc(H, 0.0);
  Vector dz(params.vocab);
  Vector dai(H), daf(H), dao(H), dag(H), tanh_c(H);
  std::size_t li = trace.loss_positions.size();  // walks loss positions backwards

  for (std::size_t t = T; t-- > 0;) {
    const StepTrace& st = trace.steps[t];
    const Vector& h_prev = (t == 0) ? trace.state0.h : trace.steps[t - 1].h;
    const Vector& c_prev = (t == 0) ? trace.state0.c : trace.steps[t - 1].c;

    if (li > 0 && trace.loss_positions[li - 1] == t) {
      --li;
      // d mean-loss / d logits = (probs - onehot(target)) / n
      const Vector& p = trace.probs[li];
      const std::size_t y = static_cast<std::size_t>(trace.loss_targets[li]);
      for (std::size_t k = 0; k < p.size(); ++k) dz[k] = p[k] * inv_n;
      dz[y] -= inv_n;
      add_outer(g.Wy, dz, st.h);
      axpy(1.0, dz, g.by);
      matvec_transpose_add(dh, params.Wy, dz);
    }

    for (std::size_t j = 0; j < H; ++j) {
      const double tc = std::tanh(st.c[j]);
      tanh_c[j] = tc;
      dao[j] = dh[j] * tc * st.o[j] * (1.0 - st.o[j]);
      dc[j] += dh[j] * st.o[j] * (1.0 - tc * tc);
    }
    for (std::size_t j = 0; j < H; ++j) {
      dai[j] = dc[j] * st.g[j] * st.i[j] * (1.0 - st.i[j]);
      daf[j] = dc[j] * c_prev[j] * st.f[j] * (1.0 - st.f[j]);
      dag[j] = dc[j] * st.i[j] * (1.0 - st.g[j] * st.g[j]);
    }

    const std::size_t xi = static_cast<std::size_t>(trace.inputs[t]);
    add_to_column(g.Wi, xi, dai);
    add_to_column(g.Wf, xi, daf);
    add_to_column(g.Wo, xi, dao);
    add_to_column(g.Wg, xi, dag);
    add_outer(g.Ui, dai, h_prev);
    add_outer(g.Uf, daf, h_prev);
    add_outer(g.Uo, dao, h_prev);
    add_outer(g.Ug, dag, h_prev);
    axpy(1.0, dai, g.bi);
    axpy(1.0, daf, g.bf);
    axpy(1.0, dao, g.bo);
    axpy(1.0, dag, g.bg);

    // dh/dc flowing one step further into the past
    std::fill(dh.begin(), dh.end(), 0.0);
    matvec_transpose_add(dh, params.Ui, dai);
    matvec_transpose_add(dh, params.Uf, daf);
    matvec_transpose_add(dh, params.Uo, dao);
    matvec_transpose_add(dh, params.Ug, dag);
    for (std::size_t j = 0; j < H; ++j) dc[j] *= st.f[j];
  }

  // Truncation boundary: dh/dc now point at state0. They become d_h0/d_c0
  // only when the window actually started from the learned initial state.
  if (trace.state0_origin == StateOrigin::learned) {
    axpy(1.0, dh, g.h0);
    axpy(1.0, dc, g.c0);
  }
}

Gradients finite_difference_grad(const ModelParams& params, const LossFn& loss_fn) {
  constexpr double kStep = 1e-5;
  ModelParams probe = params;
  Gradients g = zero_gradients(params);

  std::vector<std::vector<double>*> probe_tensors, grad_tensors;
  for_each_tensor(probe, [&](std::vector<double>& t) { probe_tensors.push_back(&t); });
  for_each_tensor(g, [&](std::vector<double>& t) { grad_tensors.push_back(&t); });

  for (std::size_t ti = 0; ti < probe_tensors.size(); ++ti) {
    std::vector<double>& t = *probe_tensors[ti];
    std::vector<double>& gt = *grad_tensors[ti];
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double saved = t[k];
      t[k] = saved + kStep;
      const double up = loss_fn(probe);
      t[k] = saved - kStep;
      const double down = loss_fn(probe);
      t[k] = saved;
      gt[k] = (up - down) / (2.0 * kStep);
    }
  }
  return g;
}

}  // namespace charlstm
