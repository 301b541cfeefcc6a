#pragma once

// Single-layer LSTM with a dense softmax readout over a character vocabulary.
// Forward passes retain every activation needed for an exact backward pass
// truncated at the window boundary; the initial (h0, c0) pair is itself a
// learnable parameter.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "charlstm/numkernel.hpp"

namespace charlstm {

// All learnable quantities. Gate weight matrices are hidden x vocab (input)
// and hidden x hidden (recurrent); the readout is vocab x hidden.
struct ModelParams {
  std::size_t vocab = 0;
  std::size_t hidden = 0;

  Matrix Wi, Wf, Wo, Wg;  // input weights, one per gate / cell candidate
  Matrix Ui, Uf, Uo, Ug;  // recurrent weights
  Vector bi, bf, bo, bg;  // gate biases
  Matrix Wy;              // dense readout weights
  Vector by;              // dense readout bias
  Vector h0, c0;          // learned initial states

  ModelParams() = default;
  ModelParams(std::size_t V, std::size_t H);

  std::size_t count() const;  // total number of scalar parameters
};

// Gradients mirror the parameter layout exactly; h0/c0 hold d_h0/d_c0.
using Gradients = ModelParams;

// Visits the 16 tensors in a fixed, documented order:
// Wi Wf Wo Wg Ui Uf Uo Ug bi bf bo bg Wy by h0 c0.
template <class F>
void for_each_tensor(ModelParams& p, F&& f) {
  f(p.Wi.data); f(p.Wf.data); f(p.Wo.data); f(p.Wg.data);
  f(p.Ui.data); f(p.Uf.data); f(p.Uo.data); f(p.Ug.data);
  f(p.bi); f(p.bf); f(p.bo); f(p.bg);
  f(p.Wy.data); f(p.by);
  f(p.h0); f(p.c0);
}

template <class F>
void for_each_tensor(const ModelParams& p, F&& f) {
  f(p.Wi.data); f(p.Wf.data); f(p.Wo.data); f(p.Wg.data);
  f(p.Ui.data); f(p.Uf.data); f(p.Uo.data); f(p.Ug.data);
  f(p.bi); f(p.bf); f(p.bo); f(p.bg);
  f(p.Wy.data); f(p.by);
  f(p.h0); f(p.c0);
}

// Pairwise visit over two same-shaped parameter sets (params and gradients,
// moments, ...). Shapes are the caller's contract.
template <class F>
void zip_tensors(const ModelParams& a, const ModelParams& b, F&& f) {
  f(a.Wi.data, b.Wi.data); f(a.Wf.data, b.Wf.data); f(a.Wo.data, b.Wo.data); f(a.Wg.data, b.Wg.data);
  f(a.Ui.data, b.Ui.data); f(a.Uf.data, b.Uf.data); f(a.Uo.data, b.Uo.data); f(a.Ug.data, b.Ug.data);
  f(a.bi, b.bi); f(a.bf, b.bf); f(a.bo, b.bo); f(a.bg, b.bg);
  f(a.Wy.data, b.Wy.data); f(a.by, b.by);
  f(a.h0, b.h0); f(a.c0, b.c0);
}

template <class F>
void zip_tensors(ModelParams& a, const ModelParams& b, F&& f) {
  f(a.Wi.data, b.Wi.data); f(a.Wf.data, b.Wf.data); f(a.Wo.data, b.Wo.data); f(a.Wg.data, b.Wg.data);
  f(a.Ui.data, b.Ui.data); f(a.Uf.data, b.Uf.data); f(a.Uo.data, b.Uo.data); f(a.Ug.data, b.Ug.data);
  f(a.bi, b.bi); f(a.bf, b.bf); f(a.bo, b.bo); f(a.bg, b.bg);
  f(a.Wy.data, b.Wy.data); f(a.by, b.by);
  f(a.h0, b.h0); f(a.c0, b.c0);
}

struct LstmState {
  Vector h;  // |h| entries in (-1, 1): output-gate-scaled tanh
  Vector c;

  LstmState() = default;
  LstmState(std::size_t hidden) : h(hidden, 0.0), c(hidden, 0.0) {}
};

// Where a window's initial state came from. Carried states are constants for
// gradient purposes; only learned starts route gradient into h0/c0.
enum class StateOrigin { learned, carried };

// Activations retained for one consumed character.
struct StepTrace {
  Vector i, f, o, g;  // gate / candidate activations
  Vector c, h;        // states after the step
};

// Everything forward_window saw and produced. Losses are recorded only at the
// requested positions; position t scores the prediction of targets[t] from the
// state reached after consuming inputs[t].
struct ForwardTrace {
  std::vector<int> inputs;
  LstmState state0;
  StateOrigin state0_origin = StateOrigin::learned;
  std::vector<StepTrace> steps;

  std::vector<std::size_t> loss_positions;  // ascending
  std::vector<int> loss_targets;
  std::vector<Vector> logits;  // one per loss position
  std::vector<Vector> probs;
  std::vector<double> losses;

  double mean_loss() const;
};

// Weights uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases and initial
// states zero. Deterministic in the seed.
ModelParams init_params(std::uint64_t seed, std::size_t V, std::size_t H);

// i,f,o = sigmoid(W x + U h + b); g = tanh(.); c' = f*c + i*g; h' = o*tanh(c').
LstmState lstm_step(const ModelParams& params, const LstmState& state, int x);

// -ln(probs[target]), floored at probs >= 1e-12 so the loss is never infinite.
double cross_entropy(const Vector& probs, int target);

ForwardTrace forward_window(const ModelParams& params, const LstmState& state0,
                            std::span<const int> chars,
                            std::span<const std::size_t> loss_positions,
                            std::span<const int> targets,
                            StateOrigin origin = StateOrigin::learned);

// Exact gradient of the mean of the recorded losses. Truncated: the window's
// initial state is a constant; d_h0/d_c0 are populated only when the trace
// started from the learned state.
Gradients backward_window(const ModelParams& params, const ForwardTrace& trace);

// Same computation, added onto an existing parameter-shaped accumulator.
// Batched callers sum many windows without a gradient buffer per window.
void accumulate_window_gradients(const ModelParams& params, const ForwardTrace& trace,
                                 Gradients& out);

// Central differences with step 1e-5, one coordinate at a time. Independent
// of backward_window: only evaluates loss_fn.
using LossFn = std::function<double(const ModelParams&)>;
Gradients finite_difference_grad(const ModelParams& params, const LossFn& loss_fn);

Gradients zero_gradients(const ModelParams& shape);

}  // namespace charlstm
