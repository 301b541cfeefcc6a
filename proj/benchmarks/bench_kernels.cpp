#include <benchmark/benchmark.h>

#include <numeric>

#include "charlstm/model.hpp"
#include "charlstm/optim.hpp"
#include "charlstm/schedules.hpp"

using namespace charlstm;

namespace {

ModelParams full_size_params(std::size_t V = 65, std::size_t H = 50) {
  return init_params(1, V, H);
}

std::vector<int> random_chars(std::size_t n, std::size_t V, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> out(n);
  for (auto& c : out) c = int(rng.uniform_int(0, std::int64_t(V) - 1));
  return out;
}

void BM_matvec(benchmark::State& state) {
  const std::size_t n = std::size_t(state.range(0));
  Matrix m(n, n);
  Rng rng(2);
  for (auto& x : m.data) x = rng.uniform_real(-1.0, 1.0);
  Vector v(n);
  for (auto& x : v) x = rng.uniform_real(-1.0, 1.0);
  Vector out(n, 0.0);
  for (auto _ : state) {
    std::fill(out.begin(), out.end(), 0.0);
    matvec_add(out, m, v);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(n) * int64_t(n));
}
BENCHMARK(BM_matvec)->Arg(50)->Arg(65);

void BM_softmax(benchmark::State& state) {
  Rng rng(3);
  Vector logits(65);
  for (auto& x : logits) x = rng.uniform_real(-5.0, 5.0);
  Vector out;
  for (auto _ : state) {
    softmax_into(out, logits);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_softmax);

void BM_lstm_step(benchmark::State& state) {
  const ModelParams params = full_size_params();
  LstmState s(params.hidden);
  int x = 0;
  for (auto _ : state) {
    s = lstm_step(params, s, x);
    x = (x + 1) % int(params.vocab);
    benchmark::DoNotOptimize(s.h.data());
  }
}
BENCHMARK(BM_lstm_step);

void BM_forward_window(benchmark::State& state) {
  const std::size_t k2 = std::size_t(state.range(0));
  const ModelParams params = full_size_params();
  const auto chars = random_chars(k2 + 1, params.vocab, 7);
  const std::vector<int> window(chars.begin(), chars.end() - 1);
  const std::vector<int> targets(chars.begin() + 1, chars.end());
  std::vector<std::size_t> positions(k2);
  std::iota(positions.begin(), positions.end(), 0);
  LstmState s0(params.hidden);
  for (auto _ : state) {
    auto trace = forward_window(params, s0, window, positions, targets);
    benchmark::DoNotOptimize(trace.losses.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(k2));
}
BENCHMARK(BM_forward_window)->Arg(5)->Arg(25)->Arg(50);

void BM_backward_window(benchmark::State& state) {
  const std::size_t k2 = std::size_t(state.range(0));
  const ModelParams params = full_size_params();
  const auto chars = random_chars(k2 + 1, params.vocab, 11);
  const std::vector<int> window(chars.begin(), chars.end() - 1);
  const std::vector<int> targets(chars.begin() + 1, chars.end());
  std::vector<std::size_t> positions(k2);
  std::iota(positions.begin(), positions.end(), 0);
  LstmState s0(params.hidden);
  const auto trace = forward_window(params, s0, window, positions, targets);
  for (auto _ : state) {
    auto grads = backward_window(params, trace);
    benchmark::DoNotOptimize(grads.Wy.data.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(k2));
}
BENCHMARK(BM_backward_window)->Arg(5)->Arg(25)->Arg(50);

void BM_adam_step(benchmark::State& state) {
  ModelParams params = full_size_params();
  Gradients grads = zero_gradients(params);
  Rng rng(13);
  for_each_tensor(grads, [&](std::vector<double>& t) {
    for (double& x : t) x = rng.uniform_real(-0.1, 0.1);
  });
  AdamState opt = adam_init(params);
  for (auto _ : state) {
    adam_step(params, grads, opt);
    benchmark::DoNotOptimize(params.Wy.data.data());
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(params.count()));
}
BENCHMARK(BM_adam_step);

void BM_train_step_schedule1(benchmark::State& state) {
  const std::size_t k2 = std::size_t(state.range(0));
  const std::size_t lanes_n = 50;
  ScheduleConfig cfg;
  cfg.schedule = 1;
  cfg.k1 = k2;
  cfg.k2 = k2;
  cfg.batch_lanes = lanes_n;

  Lanes lanes;
  for (std::size_t l = 0; l < lanes_n; ++l)
    lanes.push_back(random_chars(600, 65, 100 + l));
  ModelParams params = full_size_params();
  AdamState opt = adam_init(params);
  LaneCursors cur = make_cursors(cfg, lanes);
  for (auto _ : state) {
    const Batch batch = next_batch(cur, lanes, cfg);
    benchmark::DoNotOptimize(train_step(cfg, params, opt, batch, cur));
  }
  // sequences per second
  state.SetItemsProcessed(int64_t(state.iterations()) * int64_t(lanes_n));
}
BENCHMARK(BM_train_step_schedule1)->Arg(5)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_eval_windowed(benchmark::State& state) {
  const std::size_t k2 = std::size_t(state.range(0));
  const ModelParams params = full_size_params();
  const auto stream = random_chars(500, params.vocab, 21);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_windowed(params, stream, k2));
  }
  state.SetItemsProcessed(int64_t(state.iterations()) *
                          int64_t((500 - k2) * k2));
}
BENCHMARK(BM_eval_windowed)->Arg(5)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_eval_streaming(benchmark::State& state) {
  const ModelParams params = full_size_params();
  const auto stream = random_chars(2000, params.vocab, 23);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_streaming(params, stream));
  }
  state.SetItemsProcessed(int64_t(state.iterations()) * 2000);
}
BENCHMARK(BM_eval_streaming)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
