#include "charlstm/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "charlstm/error.hpp"

namespace charlstm {

void BenchPlan::validate() const {
  require(!schedules.empty(), "bench plan: no schedules selected");
  for (int s : schedules)
    require(s >= 1 && s <= 4, "bench plan: schedule id must be in {1,2,3,4}");
  require(runs_per_schedule >= 1, "bench plan: runs_per_schedule must be >= 1");
  require(eval_every > 0, "bench plan: eval_every must be > 0");
  require(sequence_budget >= eval_every, "bench plan: budget must be >= eval_every");
  require(k_lo >= 1 && k_lo <= k_hi, "bench plan: invalid k range");
  require(batch_lanes >= 1, "bench plan: batch_lanes must be >= 1");
  require(hidden >= 1, "bench plan: hidden must be >= 1");
  require(workers >= 1, "bench plan: workers must be >= 1");
  if (fixed_k1 != 0 || fixed_k2 != 0) {
    require(fixed_k1 != 0 && fixed_k2 != 0,
            "bench plan: pin both k1 and k2 or neither");
    require(fixed_k1 <= fixed_k2, "bench plan: fixed k1 must be <= k2");
  }
}

std::pair<std::size_t, std::size_t> sample_config(Rng& rng, std::size_t k_lo,
                                                  std::size_t k_hi) {
  const auto k2 = static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(k_lo), static_cast<std::int64_t>(k_hi)));
  const auto k1 = static_cast<std::size_t>(
      rng.uniform_int(static_cast<std::int64_t>(k_lo), static_cast<std::int64_t>(k2)));
  return {k1, k2};
}

std::uint64_t derive_run_seed(std::uint64_t master_seed, int schedule,
                              std::size_t run_index) {
  std::uint64_t h = splitmix64(master_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(schedule));
  h = splitmix64(h ^ static_cast<std::uint64_t>(run_index));
  return h;
}

namespace {

std::vector<CheckpointRecord> execute_run(const BenchPlan& plan, std::size_t run_id,
                                          int schedule, std::size_t run_index,
                                          const Lanes& lanes,
                                          std::span<const int> eval_stream,
                                          std::size_t vocab) {
  const std::uint64_t seed = derive_run_seed(plan.master_seed, schedule, run_index);
  Rng rng(seed);

  ScheduleConfig cfg;
  cfg.schedule = schedule;
  if (plan.fixed_k1 != 0) {
    cfg.k1 = plan.fixed_k1;
    cfg.k2 = plan.fixed_k2;
  } else {
    std::tie(cfg.k1, cfg.k2) = sample_config(rng, plan.k_lo, plan.k_hi);
  }
  cfg.batch_lanes = plan.batch_lanes;
  cfg.seed = seed;

  ModelParams params = init_params(rng.next(), vocab, plan.hidden);
  AdamState opt = adam_init(params, plan.adam);
  LaneCursors cursors = make_cursors(cfg, lanes);

  using Clock = std::chrono::steady_clock;
  double wall_ms = 0.0;

  std::vector<CheckpointRecord> records;
  auto checkpoint = [&](std::size_t sequences, double train_loss) {
    CheckpointRecord r;
    r.run_id = run_id;
    r.schedule = schedule;
    r.k1 = cfg.k1;
    r.k2 = cfg.k2;
    r.seed = seed;
    r.sequences_seen = sequences;
    r.wall_ms = wall_ms;  // stopwatch is paused while we evaluate
    r.train_loss = train_loss;
    r.test_perplexity = evaluate(cfg, params, eval_stream);
    records.push_back(r);
  };

  checkpoint(0, std::numeric_limits<double>::quiet_NaN());

  const std::size_t total_updates = plan.sequence_budget / plan.batch_lanes;
  std::size_t sequences = 0;
  std::size_t next_cp = plan.eval_every;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;

  for (std::size_t u = 1; u <= total_updates; ++u) {
    const auto t0 = Clock::now();
    const Batch batch = next_batch(cursors, lanes, cfg);
    const double loss = train_step(cfg, params, opt, batch, cursors);
    wall_ms += std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

    sequences += plan.batch_lanes;
    loss_sum += loss;
    ++loss_count;

    if (sequences >= next_cp || u == total_updates) {
      checkpoint(sequences, loss_sum / static_cast<double>(loss_count));
      loss_sum = 0.0;
      loss_count = 0;
      while (next_cp <= sequences) next_cp += plan.eval_every;
    }
  }
  return records;
}

}  // namespace

std::vector<CheckpointRecord> run_benchmark(const BenchPlan& plan, const Corpus& corpus,
                                            const RecordSink& sink) {
  plan.validate();
  const std::size_t max_k2 = plan.fixed_k2 != 0 ? plan.fixed_k2 : plan.k_hi;

  const CorpusSplit split = split_corpus(corpus.chars, plan.test_fraction);
  const Lanes lanes = make_lanes(split.train, plan.batch_lanes, max_k2);

  std::span<const int> eval_stream(split.test);
  if (plan.eval_cap != 0 && plan.eval_cap < eval_stream.size()) {
    eval_stream = eval_stream.subspan(0, plan.eval_cap);
  }
  if (eval_stream.size() <= max_k2) {
    throw ConfigError("test stream of " + std::to_string(eval_stream.size()) +
                      " chars cannot score windowed evaluation at k2 = " +
                      std::to_string(max_k2));
  }

  struct RunSpec {
    std::size_t run_id;
    int schedule;
    std::size_t run_index;
  };
  std::vector<RunSpec> specs;
  for (std::size_t si = 0; si < plan.schedules.size(); ++si) {
    for (std::size_t r = 0; r < plan.runs_per_schedule; ++r) {
      specs.push_back({specs.size(), plan.schedules[si], r});
    }
  }

  std::vector<std::vector<CheckpointRecord>> per_run(specs.size());
  std::vector<char> done(specs.size(), 0);
  std::mutex mu;
  std::size_t next_spec = 0;
  std::size_t next_flush = 0;
  std::exception_ptr failure;

  auto flush_ready = [&]() {
    // Holds mu. Streams complete runs to the sink in run order.
    while (next_flush < specs.size() && done[next_flush]) {
      if (sink) {
        for (const auto& r : per_run[next_flush]) sink(r);
      }
      ++next_flush;
    }
  };

  auto worker = [&]() {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (failure || next_spec >= specs.size()) return;
        idx = next_spec++;
      }
      try {
        auto recs = execute_run(plan, specs[idx].run_id, specs[idx].schedule,
                                specs[idx].run_index, lanes, eval_stream,
                                corpus.vocab.size());
        std::lock_guard<std::mutex> lock(mu);
        per_run[idx] = std::move(recs);
        done[idx] = 1;
        flush_ready();
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const std::size_t n_workers = std::min(plan.workers, specs.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<CheckpointRecord> all;
  for (auto& recs : per_run) {
    all.insert(all.end(), recs.begin(), recs.end());
  }
  return all;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  require(ec == std::errc(), "format_double: conversion failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s, const std::string& context) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError("bad real value '" + std::string(s) + "' in " + context);
  }
  return v;
}

std::uint64_t parse_u64(std::string_view s, const std::string& context) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError("bad integer value '" + std::string(s) + "' in " + context);
  }
  return v;
}

constexpr const char* kCsvHeader =
    "run_id,schedule,k1,k2,seed,sequences_seen,wall_ms,train_loss,test_perplexity";

}  // namespace

void write_csv(const std::vector<CheckpointRecord>& records,
               const std::filesystem::path& path) {
  require(!records.empty(), "write_csv: nothing to write");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open CSV for writing: " + path.string());
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.run_id << ',' << r.schedule << ',' << r.k1 << ',' << r.k2 << ','
        << r.seed << ',' << r.sequences_seen << ',' << format_double(r.wall_ms)
        << ',' << format_double(r.train_loss) << ','
        << format_double(r.test_perplexity) << '\n';
  }
  out.flush();
  if (!out) throw IoError("write failure on CSV: " + path.string());
}

std::vector<CheckpointRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV: " + path.string());
  if (line != kCsvHeader) throw IoError("unexpected CSV header in " + path.string());

  std::vector<CheckpointRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string context = path.string() + ":" + std::to_string(line_no);
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      if (comma == std::string_view::npos) {
        fields.push_back(rest);
        break;
      }
      fields.push_back(rest.substr(0, comma));
      rest = rest.substr(comma + 1);
    }
    if (fields.size() != 9) throw IoError("expected 9 fields in " + context);
    CheckpointRecord r;
    r.run_id = static_cast<std::size_t>(parse_u64(fields[0], context));
    r.schedule = static_cast<int>(parse_u64(fields[1], context));
    r.k1 = static_cast<std::size_t>(parse_u64(fields[2], context));
    r.k2 = static_cast<std::size_t>(parse_u64(fields[3], context));
    r.seed = parse_u64(fields[4], context);
    r.sequences_seen = static_cast<std::size_t>(parse_u64(fields[5], context));
    r.wall_ms = parse_double(fields[6], context);
    r.train_loss = parse_double(fields[7], context);
    r.test_perplexity = parse_double(fields[8], context);
    records.push_back(r);
  }
  return records;
}

}  // namespace charlstm
