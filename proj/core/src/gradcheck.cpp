#include "charlstm/gradcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace charlstm {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

namespace {

constexpr std::array<const char*, 16> kTensorNames = {
    "Wi", "Wf", "Wo", "Wg", "Ui", "Uf", "Uo", "Ug",
    "bi", "bf", "bo", "bg", "Wy", "by", "h0", "c0"};

GradCheckCase check_one(Rng& rng, std::size_t V, std::size_t H, std::size_t k2,
                        bool final_only) {
  ModelParams params = init_params(rng.next(), V, H);
  // Random learned initial states so d_h0/d_c0 are exercised off the origin.
  for (auto& x : params.h0) x = rng.uniform_real(-0.5, 0.5);
  for (auto& x : params.c0) x = rng.uniform_real(-0.5, 0.5);

  std::vector<int> chars(k2), targets(k2);
  for (auto& c : chars) c = static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(V) - 1));
  for (auto& t : targets) t = static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(V) - 1));

  std::vector<std::size_t> positions;
  if (final_only) {
    positions = {k2 - 1};
  } else {
    positions.resize(k2);
    std::iota(positions.begin(), positions.end(), 0);
  }

  auto window_loss = [&](const ModelParams& p) {
    LstmState s0;
    s0.h = p.h0;
    s0.c = p.c0;
    return forward_window(p, s0, chars, positions, targets).mean_loss();
  };

  LstmState s0;
  s0.h = params.h0;
  s0.c = params.c0;
  const ForwardTrace trace = forward_window(params, s0, chars, positions, targets);
  const Gradients analytic = backward_window(params, trace);
  const Gradients numeric = finite_difference_grad(params, window_loss);

  GradCheckCase result;
  result.vocab = V;
  result.hidden = H;
  result.window = k2;
  result.final_loss_only = final_only;

  std::vector<const std::vector<double>*> at, nt;
  for_each_tensor(analytic, [&](const std::vector<double>& t) { at.push_back(&t); });
  for_each_tensor(numeric, [&](const std::vector<double>& t) { nt.push_back(&t); });
  for (std::size_t ti = 0; ti < at.size(); ++ti) {
    for (std::size_t k = 0; k < at[ti]->size(); ++k) {
      const double e = relative_error((*at[ti])[k], (*nt[ti])[k]);
      if (e > result.max_rel_error) {
        result.max_rel_error = e;
        result.worst_tensor = kTensorNames[ti];
      }
    }
  }
  return result;
}

}  // namespace

GradCheckReport run_gradient_check(std::uint64_t seed, std::size_t configs) {
  Rng rng(seed);
  GradCheckReport report;
  for (std::size_t i = 0; i < configs; ++i) {
    const std::size_t V = static_cast<std::size_t>(rng.uniform_int(3, 6));
    const std::size_t H = static_cast<std::size_t>(rng.uniform_int(2, 5));
    const std::size_t k2 = static_cast<std::size_t>(rng.uniform_int(1, 4));
    for (bool final_only : {false, true}) {
      report.cases.push_back(check_one(rng, V, H, k2, final_only));
      report.max_rel_error =
          std::max(report.max_rel_error, report.cases.back().max_rel_error);
    }
  }
  return report;
}

}  // namespace charlstm
