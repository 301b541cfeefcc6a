#pragma once

// Finite-difference verification of the analytic backward pass on a sweep of
// tiny model configurations, covering both loss placements and the learned
// initial states.

#include <cstdint>
#include <string>
#include <vector>

#include "charlstm/model.hpp"

namespace charlstm {

struct GradCheckCase {
  std::size_t vocab = 0;
  std::size_t hidden = 0;
  std::size_t window = 0;
  bool final_loss_only = false;
  double max_rel_error = 0.0;
  std::string worst_tensor;
};

struct GradCheckReport {
  std::vector<GradCheckCase> cases;
  double max_rel_error = 0.0;

  bool passed(double tol = 1e-4) const { return max_rel_error < tol; }
};

// rel(a, b) = |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double analytic, double numeric);

// `configs` random draws with V in {3..6}, H in {2..5}, k2 in {1..4}; each
// checked with losses at all positions and at the final position only.
GradCheckReport run_gradient_check(std::uint64_t seed, std::size_t configs = 20);

}  // namespace charlstm
