#pragma once

// The four training / prediction schedules.
//
//   1: windows reset to the learned (h0, c0); a loss at every position.
//   2: like 1, but only the final position carries a loss.
//   3: trains exactly like 1; prediction is streaming instead of windowed.
//   4: a window's initial state is carried over from the previous window
//      (the state after that window's first k1 characters), detached from
//      the gradient; prediction is streaming.
//
// Training windows advance by k1 characters, so consecutive windows overlap
// in k2 - k1 characters.

#include <cstdint>
#include <span>
#include <vector>

#include "charlstm/model.hpp"
#include "charlstm/optim.hpp"

namespace charlstm {

using Lanes = std::vector<std::vector<int>>;

struct ScheduleConfig {
  int schedule = 1;            // 1..4
  std::size_t k1 = 5;          // stride between updates, 1 <= k1 <= k2
  std::size_t k2 = 5;          // window length == backprop depth
  std::size_t batch_lanes = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-lane read positions plus, for schedule 4, the carried states.
struct LaneCursors {
  std::vector<std::size_t> offsets;
  std::vector<LstmState> carried;
  std::vector<std::uint8_t> carry_valid;  // 0 after a lane start or wrap
};

LaneCursors make_cursors(const ScheduleConfig& cfg, const Lanes& lanes);

// One training window drawn from one lane.
struct WindowRef {
  std::span<const int> chars;    // k2 characters
  std::span<const int> targets;  // the k2 next characters
  std::size_t lane = 0;
  bool state0_learned = true;    // start from params (h0, c0)?
  LstmState state0;              // the carried state when !state0_learned
};

using Batch = std::vector<WindowRef>;

// Each lane yields chars[offset, offset+k2) with the next characters as
// targets, then its offset advances by k1. A lane that cannot supply a full
// window wraps to offset 0 and forgets its carried state.
Batch next_batch(LaneCursors& cursors, const Lanes& lanes, const ScheduleConfig& cfg);

// One gradient update: per-lane forward/backward under the schedule's loss
// placement and initial-state rule, gradients averaged over lanes, one Adam
// step. Returns the mean training loss. For schedule 4 the carried states in
// `cursors` are refreshed with the post-k1 states of this batch's windows.
double train_step(const ScheduleConfig& cfg, ModelParams& params, AdamState& opt,
                  const Batch& batch, LaneCursors& cursors);

// Every position i in [k2, |test|) is scored by running a fresh window
// test[i-k2, i) from the learned initial state and predicting test[i].
// Returns exp(mean cross-entropy).
double eval_windowed(const ModelParams& params, std::span<const int> test,
                     std::size_t k2);

// One continuously updated state: position 0 is predicted straight from the
// learned initial hidden state, every later position after consuming the
// previous character. All |test| positions are scored.
double eval_streaming(const ModelParams& params, std::span<const int> test);

// The schedule's own prediction procedure: windowed for 1-2, streaming for 3-4.
double evaluate(const ScheduleConfig& cfg, const ModelParams& params,
                std::span<const int> test);

}  // namespace charlstm
