#include "charlstm/schedules.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "charlstm/error.hpp"

namespace charlstm {

void ScheduleConfig::validate() const {
  require(schedule >= 1 && schedule <= 4,
          "schedule id must be in {1,2,3,4}, got " + std::to_string(schedule));
  require(k1 >= 1, "k1 must be >= 1");
  require(k1 <= k2, "k1 must be <= k2 (got k1=" + std::to_string(k1) +
                        ", k2=" + std::to_string(k2) + ")");
  require(batch_lanes >= 1, "batch_lanes must be >= 1");
}

LaneCursors make_cursors(const ScheduleConfig& cfg, const Lanes& lanes) {
  cfg.validate();
  require(lanes.size() == cfg.batch_lanes,
          "make_cursors: lane count does not match batch_lanes");
  for (const auto& lane : lanes) {
    if (lane.size() < cfg.k2 + 1) {
      throw ConfigError("lane of " + std::to_string(lane.size()) +
                        " chars is shorter than k2+1 = " + std::to_string(cfg.k2 + 1));
    }
  }
  LaneCursors cur;
  cur.offsets.assign(lanes.size(), 0);
  cur.carried.assign(lanes.size(), LstmState{});
  cur.carry_valid.assign(lanes.size(), 0);
  return cur;
}

Batch next_batch(LaneCursors& cursors, const Lanes& lanes, const ScheduleConfig& cfg) {
  require(cursors.offsets.size() == lanes.size(), "next_batch: cursor/lane mismatch");
  Batch batch;
  batch.reserve(lanes.size());
  for (std::size_t l = 0; l < lanes.size(); ++l) {
    const auto& lane = lanes[l];
    // Wrap before reading: a lane that cannot fit a window plus its targets
    // restarts at 0 and behaves like a fresh lane start.
    if (cursors.offsets[l] + cfg.k2 + 1 > lane.size()) {
      cursors.offsets[l] = 0;
      cursors.carry_valid[l] = 0;
    }
    const std::size_t off = cursors.offsets[l];
    WindowRef w;
    w.chars = std::span<const int>(lane).subspan(off, cfg.k2);
    w.targets = std::span<const int>(lane).subspan(off + 1, cfg.k2);
    w.lane = l;
    if (cfg.schedule == 4 && cursors.carry_valid[l]) {
      w.state0_learned = false;
      w.state0 = cursors.carried[l];
    }
    batch.push_back(std::move(w));
    cursors.offsets[l] = off + cfg.k1;
  }
  return batch;
}

namespace {

std::vector<std::size_t> loss_positions_for(const ScheduleConfig& cfg) {
  if (cfg.schedule == 2) return {cfg.k2 - 1};
  std::vector<std::size_t> all(cfg.k2);
  std::iota(all.begin(), all.end(), 0);
  return all;
}

}  // namespace

double train_step(const ScheduleConfig& cfg, ModelParams& params, AdamState& opt,
                  const Batch& batch, LaneCursors& cursors) {
  cfg.validate();
  require(!batch.empty(), "train_step: empty batch");

  const std::vector<std::size_t> positions = loss_positions_for(cfg);
  Gradients sum = zero_gradients(params);
  double loss_sum = 0.0;

  for (const WindowRef& w : batch) {
    require(w.chars.size() == cfg.k2, "train_step: window length != k2");
    const bool learned = (cfg.schedule != 4) || w.state0_learned;

    ForwardTrace trace;
    if (learned) {
      LstmState s0;
      s0.h = params.h0;
      s0.c = params.c0;
      trace = forward_window(params, s0, w.chars, positions, w.targets,
                             StateOrigin::learned);
    } else {
      trace = forward_window(params, w.state0, w.chars, positions, w.targets,
                             StateOrigin::carried);
    }

    if (cfg.schedule == 4) {
      // The next window of this lane starts from the state reached after the
      // first k1 characters of this one; values only, no gradient.
      const StepTrace& at = trace.steps[cfg.k1 - 1];
      cursors.carried[w.lane].h = at.h;
      cursors.carried[w.lane].c = at.c;
      cursors.carry_valid[w.lane] = 1;
    }

    loss_sum += trace.mean_loss();
    accumulate_window_gradients(params, trace, sum);
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  for_each_tensor(sum, [&](std::vector<double>& t) {
    for (double& x : t) x *= inv;
  });
  adam_step(params, sum, opt);
  return loss_sum * inv;
}

double eval_windowed(const ModelParams& params, std::span<const int> test,
                     std::size_t k2) {
  require(k2 >= 1, "eval_windowed: k2 must be >= 1");
  require(test.size() > k2, "eval_windowed: test stream no longer than k2");
  double ce_sum = 0.0;
  std::size_t scored = 0;
  Vector logits(params.vocab);
  Vector probs(params.vocab);
  LstmState init;
  init.h = params.h0;
  init.c = params.c0;
  for (std::size_t i = k2; i < test.size(); ++i) {
    LstmState s = init;
    for (std::size_t t = i - k2; t < i; ++t) s = lstm_step(params, s, test[t]);
    logits = params.by;
    matvec_add(logits, params.Wy, s.h);
    softmax_into(probs, logits);
    ce_sum += cross_entropy(probs, test[i]);
    ++scored;
  }
  return std::exp(ce_sum / static_cast<double>(scored));
}

double eval_streaming(const ModelParams& params, std::span<const int> test) {
  require(!test.empty(), "eval_streaming: empty test stream");
  double ce_sum = 0.0;
  Vector logits(params.vocab);
  Vector probs(params.vocab);
  LstmState s;
  s.h = params.h0;
  s.c = params.c0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (i > 0) s = lstm_step(params, s, test[i - 1]);
    logits = params.by;
    matvec_add(logits, params.Wy, s.h);
    softmax_into(probs, logits);
    ce_sum += cross_entropy(probs, test[i]);
  }
  return std::exp(ce_sum / static_cast<double>(test.size()));
}

double evaluate(const ScheduleConfig& cfg, const ModelParams& params,
                std::span<const int> test) {
  cfg.validate();
  if (cfg.schedule <= 2) return eval_windowed(params, test, cfg.k2);
  return eval_streaming(params, test);
}

}  // namespace charlstm
