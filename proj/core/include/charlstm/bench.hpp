#pragma once

// The efficiency experiment: sample (k1, k2) settings, train each schedule
// under a sequence budget, checkpoint test perplexity against sequences seen
// and training-only wall time, and stream records to a sink in run order.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <utility>
#include <vector>

#include "charlstm/data.hpp"
#include "charlstm/optim.hpp"
#include "charlstm/schedules.hpp"

namespace charlstm {

struct BenchPlan {
  std::vector<int> schedules = {1, 2, 3, 4};
  std::size_t runs_per_schedule = 100;
  std::size_t sequence_budget = 500000;  // one sequence = one window from one lane
  std::size_t k_lo = 5;
  std::size_t k_hi = 50;
  std::size_t batch_lanes = 50;
  std::size_t eval_every = 2500;  // checkpoint cadence in sequences
  std::uint64_t master_seed = 0;

  std::size_t hidden = 50;
  AdamConfig adam;
  double test_fraction = 0.01;
  std::size_t eval_cap = 0;  // score only the first eval_cap test chars; 0 = all
  std::size_t workers = 1;   // concurrent runs
  std::size_t fixed_k1 = 0;  // pin k1/k2 instead of sampling; 0 = sample
  std::size_t fixed_k2 = 0;

  void validate() const;
};

struct CheckpointRecord {
  std::size_t run_id = 0;
  int schedule = 0;
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  std::uint64_t seed = 0;
  std::size_t sequences_seen = 0;
  double wall_ms = 0.0;      // training-only; evaluation time excluded
  double train_loss = 0.0;   // mean loss since the previous checkpoint
  double test_perplexity = 0.0;
};

// k2 uniform on [k_lo, k_hi], then k1 uniform on [k_lo, k2].
std::pair<std::size_t, std::size_t> sample_config(Rng& rng, std::size_t k_lo,
                                                  std::size_t k_hi);

// Independent per-run seed stream: splitmix64 folded over master seed,
// schedule id and run index.
std::uint64_t derive_run_seed(std::uint64_t master_seed, int schedule,
                              std::size_t run_index);

using RecordSink = std::function<void(const CheckpointRecord&)>;

// Executes the plan. Returns all records in run order (schedules in plan
// order, run indices ascending, checkpoints chronological); the sink, when
// given, receives the same records in the same order as runs complete.
// Identical plans yield identical records except the wall_ms column,
// regardless of the worker count.
std::vector<CheckpointRecord> run_benchmark(const BenchPlan& plan, const Corpus& corpus,
                                            const RecordSink& sink = {});

// Header: run_id,schedule,k1,k2,seed,sequences_seen,wall_ms,train_loss,test_perplexity
// Reals are written in shortest form that round-trips 64-bit exactly.
void write_csv(const std::vector<CheckpointRecord>& records,
               const std::filesystem::path& path);

std::vector<CheckpointRecord> read_csv(const std::filesystem::path& path);

}  // namespace charlstm
