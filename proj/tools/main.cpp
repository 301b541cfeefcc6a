// charlstm: train, evaluate and benchmark character-level LSTM training
// schedules from the command line.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "charlstm/bench.hpp"
#include "charlstm/data.hpp"
#include "charlstm/error.hpp"
#include "charlstm/gradcheck.hpp"
#include "charlstm/plot.hpp"
#include "charlstm/schedules.hpp"
#include "charlstm/snapshot.hpp"

namespace {

using namespace charlstm;

std::string fmt_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("0");
}

struct CommonTrainFlags {
  std::string corpus;
  std::size_t hidden = 50;
  std::size_t lanes = 50;
  std::size_t budget = 500000;
  std::size_t eval_every = 2500;
  std::size_t eval_cap = 0;
  double test_fraction = 0.01;
  std::uint64_t seed = 0;
  AdamConfig adam;
};

void add_adam_flags(CLI::App* cmd, AdamConfig& adam) {
  cmd->add_option("--alpha", adam.alpha, "Adam step size")->capture_default_str();
  cmd->add_option("--beta1", adam.beta1, "Adam first-moment decay")->capture_default_str();
  cmd->add_option("--beta2", adam.beta2, "Adam second-moment decay")->capture_default_str();
  cmd->add_option("--eps", adam.eps, "Adam stabilizer")->capture_default_str();
}

void add_common_flags(CLI::App* cmd, CommonTrainFlags& f) {
  cmd->add_option("--corpus", f.corpus, "Plain-text corpus file")->required();
  cmd->add_option("--hidden", f.hidden, "LSTM hidden size")->capture_default_str();
  cmd->add_option("--lanes", f.lanes, "Batch lanes (batch size)")->capture_default_str();
  cmd->add_option("--budget", f.budget, "Training budget in input sequences")
      ->capture_default_str();
  cmd->add_option("--eval-every", f.eval_every, "Checkpoint cadence in sequences")
      ->capture_default_str();
  cmd->add_option("--eval-cap", f.eval_cap,
                  "Score only the first N test chars (0 = all)")
      ->capture_default_str();
  cmd->add_option("--test-fraction", f.test_fraction,
                  "Fraction of the corpus tail held out for testing")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Master seed")->capture_default_str();
  add_adam_flags(cmd, f.adam);
}

std::string render_common(const CommonTrainFlags& f) {
  std::ostringstream os;
  os << "--corpus " << f.corpus << " --hidden " << f.hidden << " --lanes " << f.lanes
     << " --budget " << f.budget << " --eval-every " << f.eval_every
     << " --eval-cap " << f.eval_cap << " --test-fraction " << fmt_real(f.test_fraction)
     << " --seed " << f.seed << " --alpha " << fmt_real(f.adam.alpha) << " --beta1 "
     << fmt_real(f.adam.beta1) << " --beta2 " << fmt_real(f.adam.beta2) << " --eps "
     << fmt_real(f.adam.eps);
  return os.str();
}

std::span<const int> capped(std::span<const int> stream, std::size_t cap) {
  if (cap != 0 && cap < stream.size()) return stream.subspan(0, cap);
  return stream;
}

int cmd_train(const CommonTrainFlags& f, int schedule, std::size_t k1, std::size_t k2,
              const std::string& out_model, const std::string& out_csv) {
  if (k1 > k2) {
    std::cerr << "error: --k1 must be <= --k2 (got " << k1 << " > " << k2 << ")\n";
    return 2;
  }
  ScheduleConfig cfg;
  cfg.schedule = schedule;
  cfg.k1 = k1;
  cfg.k2 = k2;
  cfg.batch_lanes = f.lanes;
  cfg.seed = f.seed;
  cfg.validate();

  const Corpus corpus = make_corpus(load_corpus(f.corpus));
  const CorpusSplit split = split_corpus(corpus.chars, f.test_fraction);
  const Lanes lanes = make_lanes(split.train, f.lanes, k2);
  const std::span<const int> test = capped(split.test, f.eval_cap);
  if (test.size() <= k2) {
    throw ConfigError("test stream too short for windowed evaluation at k2=" +
                      std::to_string(k2));
  }

  Rng rng(f.seed);
  ModelParams params = init_params(rng.next(), corpus.vocab.size(), f.hidden);
  AdamState opt = adam_init(params, f.adam);
  LaneCursors cursors = make_cursors(cfg, lanes);

  std::vector<CheckpointRecord> records;
  double wall_ms = 0.0;
  auto checkpoint = [&](std::size_t sequences, double train_loss) {
    CheckpointRecord r;
    r.run_id = 0;
    r.schedule = schedule;
    r.k1 = k1;
    r.k2 = k2;
    r.seed = f.seed;
    r.sequences_seen = sequences;
    r.wall_ms = wall_ms;
    r.train_loss = train_loss;
    r.test_perplexity = evaluate(cfg, params, test);
    records.push_back(r);
    std::printf("seq %10zu  wall %9.1f ms  train loss %8.5f  test ppl %9.4f\n",
                sequences, wall_ms, train_loss, r.test_perplexity);
  };

  using Clock = std::chrono::steady_clock;
  const std::size_t total_updates = f.budget / f.lanes;
  std::size_t sequences = 0, next_cp = f.eval_every;
  double loss_sum = 0.0;
  std::size_t loss_n = 0;
  checkpoint(0, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t u = 1; u <= total_updates; ++u) {
    const auto t0 = Clock::now();
    const Batch batch = next_batch(cursors, lanes, cfg);
    const double loss = train_step(cfg, params, opt, batch, cursors);
    wall_ms += std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    sequences += f.lanes;
    loss_sum += loss;
    ++loss_n;
    if (sequences >= next_cp || u == total_updates) {
      checkpoint(sequences, loss_sum / double(loss_n));
      loss_sum = 0.0;
      loss_n = 0;
      while (next_cp <= sequences) next_cp += f.eval_every;
    }
  }

  save_model(params, out_model);
  std::printf("model snapshot written to %s\n", out_model.c_str());
  if (!out_csv.empty()) {
    write_csv(records, out_csv);
    std::printf("checkpoint curve written to %s\n", out_csv.c_str());
  }
  return 0;
}

int cmd_eval(const std::string& corpus_path, const std::string& model_path,
             bool zeroed, std::size_t hidden, const std::string& mode,
             std::size_t k2, double test_fraction, std::size_t eval_cap) {
  const Corpus corpus = make_corpus(load_corpus(corpus_path));
  const CorpusSplit split = split_corpus(corpus.chars, test_fraction);
  const std::span<const int> test = capped(split.test, eval_cap);

  ModelParams params;
  if (zeroed) {
    params = ModelParams(corpus.vocab.size(), hidden);
  } else {
    if (model_path.empty()) {
      std::cerr << "error: provide --model or --zeroed\n";
      return 2;
    }
    params = load_model(model_path);
    if (params.vocab != corpus.vocab.size()) {
      throw ConfigError("snapshot vocabulary (" + std::to_string(params.vocab) +
                        ") does not match corpus vocabulary (" +
                        std::to_string(corpus.vocab.size()) + ")");
    }
  }

  double ppl = 0.0;
  if (mode == "windowed") {
    ppl = eval_windowed(params, test, k2);
  } else {
    ppl = eval_streaming(params, test);
  }
  std::printf("perplexity %.12g\n", ppl);
  return 0;
}

int cmd_bench(const CommonTrainFlags& f, std::vector<int> schedules, std::size_t runs,
              std::size_t k_lo, std::size_t k_hi, std::size_t fixed_k1,
              std::size_t fixed_k2, std::size_t workers, const std::string& out_csv,
              bool quiet) {
  BenchPlan plan;
  plan.schedules = std::move(schedules);
  plan.runs_per_schedule = runs;
  plan.sequence_budget = f.budget;
  plan.k_lo = k_lo;
  plan.k_hi = k_hi;
  plan.batch_lanes = f.lanes;
  plan.eval_every = f.eval_every;
  plan.master_seed = f.seed;
  plan.hidden = f.hidden;
  plan.adam = f.adam;
  plan.test_fraction = f.test_fraction;
  plan.eval_cap = f.eval_cap;
  plan.workers = workers;
  plan.fixed_k1 = fixed_k1;
  plan.fixed_k2 = fixed_k2;
  plan.validate();

  const Corpus corpus = make_corpus(load_corpus(f.corpus));
  const auto records = run_benchmark(plan, corpus, [&](const CheckpointRecord& r) {
    if (!quiet) {
      std::printf(
          "run %3zu sched %d k1 %2zu k2 %2zu  seq %8zu  wall %9.1f ms  ppl %9.4f\n",
          r.run_id, r.schedule, r.k1, r.k2, r.sequences_seen, r.wall_ms,
          r.test_perplexity);
    }
  });
  write_csv(records, out_csv);
  std::printf("%zu checkpoint records written to %s\n", records.size(),
              out_csv.c_str());
  return 0;
}

int cmd_plot(const std::string& in_csv, const std::string& axis,
             const std::string& out_svg, bool log_y) {
  const auto records = read_csv(in_csv);
  const CurveAxis a = axis == "wall_ms" ? CurveAxis::wall_ms : CurveAxis::sequences;
  render_curves(records, a, out_svg, log_y);
  std::printf("curves written to %s\n", out_svg.c_str());
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, std::size_t configs) {
  const auto t0 = std::chrono::steady_clock::now();
  const GradCheckReport report = run_gradient_check(seed, configs);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& c : report.cases) {
    std::printf("V=%zu H=%zu k2=%zu %-10s max rel err %.3e (worst: %s)\n", c.vocab,
                c.hidden, c.window, c.final_loss_only ? "final-only" : "all-pos",
                c.max_rel_error, c.worst_tensor.c_str());
  }
  std::printf("max relative error %.6e over %zu cases in %.2f s\n",
              report.max_rel_error, report.cases.size(), secs);
  if (report.passed()) {
    std::printf("PASS (tolerance 1e-4)\n");
    return 0;
  }
  std::printf("FAIL (tolerance 1e-4)\n");
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"character-level LSTM training-schedule laboratory"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train one schedule and save a snapshot");
  CommonTrainFlags tf;
  int t_schedule = 1;
  std::size_t t_k1 = 5, t_k2 = 5;
  std::string t_out = "model.bin", t_csv;
  add_common_flags(train, tf);
  train->add_option("--schedule", t_schedule, "Training schedule (1-4)")
      ->check(CLI::Range(1, 4))
      ->capture_default_str();
  train->add_option("--k1", t_k1, "Stride between updates")->capture_default_str();
  train->add_option("--k2", t_k2, "Window length / backprop depth")
      ->capture_default_str();
  train->add_option("--out", t_out, "Model snapshot path")->capture_default_str();
  train->add_option("--out-csv", t_csv, "Also write the checkpoint curve as CSV");
  bool t_dump = false;
  train->add_flag("--dump-config", t_dump, "Print the effective flags and exit");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a snapshot's test perplexity");
  std::string e_corpus, e_model, e_mode = "windowed";
  bool e_zeroed = false;
  std::size_t e_hidden = 50, e_k2 = 50, e_cap = 0;
  double e_fraction = 0.01;
  eval->add_option("--corpus", e_corpus, "Plain-text corpus file")->required();
  eval->add_option("--model", e_model, "Model snapshot to evaluate");
  eval->add_flag("--zeroed", e_zeroed, "Evaluate an all-zero-weight model instead");
  eval->add_option("--hidden", e_hidden, "Hidden size for --zeroed")
      ->capture_default_str();
  eval->add_option("--mode", e_mode, "Evaluation procedure")
      ->check(CLI::IsMember({"windowed", "streaming"}))
      ->capture_default_str();
  eval->add_option("--k2", e_k2, "Context length for windowed evaluation")
      ->capture_default_str();
  eval->add_option("--test-fraction", e_fraction, "Held-out tail fraction")
      ->capture_default_str();
  eval->add_option("--eval-cap", e_cap, "Score only the first N test chars (0 = all)")
      ->capture_default_str();
  bool e_dump = false;
  eval->add_flag("--dump-config", e_dump, "Print the effective flags and exit");

  // bench
  auto* bench = app.add_subcommand(
      "bench", "Run the schedule-efficiency benchmark and write checkpoints as CSV");
  CommonTrainFlags bf;
  std::vector<int> b_schedules = {1, 2, 3, 4};
  std::size_t b_runs = 100, b_klo = 5, b_khi = 50, b_k1 = 0, b_k2 = 0, b_workers = 1;
  std::string b_csv = "bench.csv";
  bool b_quiet = false;
  add_common_flags(bench, bf);
  bench->add_option("--schedules", b_schedules, "Schedules to benchmark")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--runs", b_runs, "Runs per schedule")->capture_default_str();
  bench->add_option("--k-lo", b_klo, "Lower bound for sampled k")->capture_default_str();
  bench->add_option("--k-hi", b_khi, "Upper bound for sampled k")->capture_default_str();
  bench->add_option("--k1", b_k1, "Pin k1 instead of sampling (0 = sample)")
      ->capture_default_str();
  bench->add_option("--k2", b_k2, "Pin k2 instead of sampling (0 = sample)")
      ->capture_default_str();
  bench->add_option("--workers", b_workers, "Concurrent runs")->capture_default_str();
  bench->add_option("--out-csv", b_csv, "Checkpoint CSV path")->capture_default_str();
  bench->add_flag("--quiet", b_quiet, "Suppress per-checkpoint progress lines");
  bool b_dump = false;
  bench->add_flag("--dump-config", b_dump, "Print the effective flags and exit");

  // plot
  auto* plot = app.add_subcommand("plot", "Render benchmark CSV as SVG curves");
  std::string p_csv, p_axis = "sequences", p_svg = "curves.svg";
  bool p_logy = false;
  plot->add_option("--in-csv", p_csv, "Benchmark checkpoint CSV")->required();
  plot->add_option("--axis", p_axis, "X axis")
      ->check(CLI::IsMember({"sequences", "wall_ms"}))
      ->capture_default_str();
  plot->add_option("--out-svg", p_svg, "Output SVG path")->capture_default_str();
  plot->add_flag("--log-y", p_logy, "Log-scale the perplexity axis");
  bool p_dump = false;
  plot->add_flag("--dump-config", p_dump, "Print the effective flags and exit");

  // gradcheck
  auto* gc = app.add_subcommand(
      "gradcheck", "Check analytic gradients against finite differences");
  std::uint64_t g_seed = 20260811;
  std::size_t g_configs = 20;
  gc->add_option("--seed", g_seed, "Sweep seed")->capture_default_str();
  gc->add_option("--configs", g_configs, "Number of random tiny configurations")
      ->capture_default_str();
  bool g_dump = false;
  gc->add_flag("--dump-config", g_dump, "Print the effective flags and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      if (t_dump) {
        std::ostringstream os;
        os << "train " << render_common(tf) << " --schedule " << t_schedule << " --k1 "
           << t_k1 << " --k2 " << t_k2 << " --out " << t_out;
        if (!t_csv.empty()) os << " --out-csv " << t_csv;
        std::printf("%s\n", os.str().c_str());
        return 0;
      }
      return cmd_train(tf, t_schedule, t_k1, t_k2, t_out, t_csv);
    }
    if (eval->parsed()) {
      if (e_dump) {
        std::ostringstream os;
        os << "eval --corpus " << e_corpus;
        if (!e_model.empty()) os << " --model " << e_model;
        if (e_zeroed) os << " --zeroed";
        os << " --hidden " << e_hidden << " --mode " << e_mode << " --k2 " << e_k2
           << " --test-fraction " << fmt_real(e_fraction) << " --eval-cap " << e_cap;
        std::printf("%s\n", os.str().c_str());
        return 0;
      }
      return cmd_eval(e_corpus, e_model, e_zeroed, e_hidden, e_mode, e_k2, e_fraction,
                      e_cap);
    }
    if (bench->parsed()) {
      if (b_dump) {
        std::ostringstream os;
        os << "bench " << render_common(bf) << " --schedules ";
        for (std::size_t i = 0; i < b_schedules.size(); ++i)
          os << (i ? "," : "") << b_schedules[i];
        os << " --runs " << b_runs << " --k-lo " << b_klo << " --k-hi " << b_khi
           << " --k1 " << b_k1 << " --k2 " << b_k2 << " --workers " << b_workers
           << " --out-csv " << b_csv;
        if (b_quiet) os << " --quiet";
        std::printf("%s\n", os.str().c_str());
        return 0;
      }
      return cmd_bench(bf, b_schedules, b_runs, b_klo, b_khi, b_k1, b_k2, b_workers,
                       b_csv, b_quiet);
    }
    if (plot->parsed()) {
      if (p_dump) {
        std::ostringstream os;
        os << "plot --in-csv " << p_csv << " --axis " << p_axis << " --out-svg "
           << p_svg;
        if (p_logy) os << " --log-y";
        std::printf("%s\n", os.str().c_str());
        return 0;
      }
      return cmd_plot(p_csv, p_axis, p_svg, p_logy);
    }
    if (gc->parsed()) {
      if (g_dump) {
        std::printf("gradcheck --seed %llu --configs %zu\n",
                    static_cast<unsigned long long>(g_seed), g_configs);
        return 0;
      }
      return cmd_gradcheck(g_seed, g_configs);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
