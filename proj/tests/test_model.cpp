#include "charlstm/model.hpp"

#include <cmath>
#include <numeric>

#include "charlstm/error.hpp"
#include "charlstm/gradcheck.hpp"
#include "doctest.h"

using namespace charlstm;

namespace {

bool params_equal(const ModelParams& a, const ModelParams& b) {
  bool eq = a.vocab == b.vocab && a.hidden == b.hidden;
  zip_tensors(a, b, [&](const std::vector<double>& x, const std::vector<double>& y) {
    if (x != y) eq = false;
  });
  return eq;
}

std::vector<std::size_t> all_positions(std::size_t k2) {
  std::vector<std::size_t> p(k2);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

}  // namespace

TEST_CASE("init_params: deterministic in the seed") {
  const ModelParams a = init_params(77, 6, 4);
  const ModelParams b = init_params(77, 6, 4);
  CHECK(params_equal(a, b));
  const ModelParams c = init_params(78, 6, 4);
  CHECK_FALSE(params_equal(a, c));
}

TEST_CASE("init_params: weight ranges and zero biases/states") {
  const std::size_t V = 5, H = 4;
  const ModelParams p = init_params(3, V, H);
  const double s_in = 1.0 / std::sqrt(double(V));
  const double s_rec = 1.0 / std::sqrt(double(H));
  for (const Matrix* m : {&p.Wi, &p.Wf, &p.Wo, &p.Wg})
    for (double w : m->data) CHECK(std::abs(w) <= s_in);
  for (const Matrix* m : {&p.Ui, &p.Uf, &p.Uo, &p.Ug, &p.Wy})
    for (double w : m->data) CHECK(std::abs(w) <= s_rec);
  for (const Vector* v : {&p.bi, &p.bf, &p.bo, &p.bg, &p.by, &p.h0, &p.c0})
    for (double x : *v) CHECK(x == 0.0);
}

TEST_CASE("init_params: rejects degenerate dimensions") {
  CHECK_THROWS_AS(init_params(0, 1, 4), ContractViolation);
  CHECK_THROWS_AS(init_params(0, 5, 0), ContractViolation);
}

TEST_CASE("all-zero parameters produce exactly zero logits") {
  const ModelParams p(4, 3);  // zero-initialized
  LstmState s(3);
  s = lstm_step(p, s, 2);
  Vector logits = p.by;
  matvec_add(logits, p.Wy, s.h);
  for (double z : logits) CHECK(z == 0.0);
}

TEST_CASE("lstm_step: zero params, zero state") {
  const ModelParams p(4, 3);
  const LstmState next = lstm_step(p, LstmState(3), 1);
  for (double h : next.h) CHECK(h == 0.0);
  for (double c : next.c) CHECK(c == 0.0);
}

TEST_CASE("lstm_step: zero params halve the carried cell") {
  const std::size_t H = 5;
  const ModelParams p(4, H);
  LstmState s(H);
  for (auto& c : s.c) c = 1.0;
  const LstmState next = lstm_step(p, s, 0);
  for (std::size_t j = 0; j < H; ++j) {
    CHECK(next.c[j] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(next.h[j] == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-15));
  }
}

TEST_CASE("lstm_step: hidden state bounded by the gate structure") {
  const ModelParams p = init_params(9, 6, 5);
  LstmState s(5);
  for (int t = 0; t < 40; ++t) {
    s = lstm_step(p, s, t % 6);
    for (double h : s.h) {
      CHECK(h > -1.0);
      CHECK(h < 1.0);
    }
  }
}

TEST_CASE("lstm_step: out-of-range character throws") {
  const ModelParams p(4, 3);
  CHECK_THROWS_AS(lstm_step(p, LstmState(3), 4), ContractViolation);
  CHECK_THROWS_AS(lstm_step(p, LstmState(3), -1), ContractViolation);
}

TEST_CASE("cross_entropy: pinned values") {
  Vector onehot(65, 0.0);
  onehot[7] = 1.0;
  CHECK(cross_entropy(onehot, 7) == 0.0);

  Vector uniform(65, 1.0 / 65.0);
  CHECK(cross_entropy(uniform, 12) == doctest::Approx(4.17438727).epsilon(1e-8));
  CHECK(cross_entropy(uniform, 12) == doctest::Approx(std::log(65.0)).epsilon(1e-14));

  Vector half{0.5, 0.25, 0.25};
  CHECK(cross_entropy(half, 0) == doctest::Approx(0.69314718).epsilon(1e-8));
}

TEST_CASE("cross_entropy: zero probability is floored, never infinite") {
  Vector p{0.0, 1.0};
  const double loss = cross_entropy(p, 0);
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(-std::log(1e-12)));
  CHECK_THROWS_AS(cross_entropy(p, 2), ContractViolation);
}

TEST_CASE("forward_window: loss count follows the requested positions") {
  const ModelParams p = init_params(5, 5, 4);
  const std::vector<int> chars{0, 1, 2};
  const std::vector<int> targets{1, 2, 3};
  LstmState s0(4);

  const auto t_all = forward_window(p, s0, chars, all_positions(3), targets);
  CHECK(t_all.losses.size() == 3);
  CHECK(t_all.steps.size() == 3);

  const std::vector<std::size_t> last{2};
  const auto t_last = forward_window(p, s0, chars, last, targets);
  CHECK(t_last.losses.size() == 1);

  for (const auto& pr : t_all.probs) {
    double sum = 0.0;
    for (double x : pr) sum += x;
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("forward_window: zero model scores ln V everywhere") {
  const std::size_t V = 7;
  const ModelParams p(V, 3);
  const std::vector<int> chars{0, 1, 2, 3};
  const std::vector<int> targets{1, 2, 3, 4};
  const auto tr = forward_window(p, LstmState(3), chars, all_positions(4), targets);
  for (double l : tr.losses) CHECK(l == doctest::Approx(std::log(double(V))).epsilon(1e-12));
}

TEST_CASE("forward_window: deterministic traces") {
  const ModelParams p = init_params(123, 6, 5);
  const std::vector<int> chars{1, 4, 2, 0, 5};
  const std::vector<int> targets{4, 2, 0, 5, 3};
  LstmState s0(5);
  const auto a = forward_window(p, s0, chars, all_positions(5), targets);
  const auto b = forward_window(p, s0, chars, all_positions(5), targets);
  CHECK(a.losses == b.losses);
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    CHECK(a.steps[t].h == b.steps[t].h);
    CHECK(a.steps[t].c == b.steps[t].c);
  }
}

TEST_CASE("forward_window: missing target at a loss position throws") {
  const ModelParams p = init_params(9, 5, 4);
  const std::vector<int> chars{0, 1, 2};
  const std::vector<int> targets{1, 2};  // nothing for position 2
  const std::vector<std::size_t> last{2};
  CHECK_THROWS_AS(forward_window(p, LstmState(4), chars, last, targets),
                  ContractViolation);
}

TEST_CASE("backward_window: synthetic perfect predictions give zero gradients") {
  const ModelParams p = init_params(11, 5, 4);
  const std::vector<int> chars{0, 1, 2};
  const std::vector<int> targets{1, 2, 3};
  LstmState s0(4);
  s0.h = p.h0;
  s0.c = p.c0;
  auto tr = forward_window(p, s0, chars, all_positions(3), targets);
  // Overwrite the recorded distributions with probability 1 on each target.
  for (std::size_t j = 0; j < tr.probs.size(); ++j) {
    std::fill(tr.probs[j].begin(), tr.probs[j].end(), 0.0);
    tr.probs[j][static_cast<std::size_t>(tr.loss_targets[j])] = 1.0;
  }
  const Gradients g = backward_window(p, tr);
  for_each_tensor(g, [](const std::vector<double>& t) {
    for (double x : t) CHECK(x == 0.0);
  });
}

TEST_CASE("backward_window matches finite differences on a tiny model") {
  Rng rng(2024);
  const std::size_t V = 5, H = 4, k2 = 3;
  ModelParams params = init_params(rng.next(), V, H);
  for (auto& x : params.h0) x = rng.uniform_real(-0.4, 0.4);
  for (auto& x : params.c0) x = rng.uniform_real(-0.4, 0.4);
  std::vector<int> chars{0, 3, 1};
  std::vector<int> targets{3, 1, 4};

  for (const auto& positions :
       {all_positions(k2), std::vector<std::size_t>{k2 - 1}}) {
    auto loss_fn = [&](const ModelParams& q) {
      LstmState s0;
      s0.h = q.h0;
      s0.c = q.c0;
      return forward_window(q, s0, chars, positions, targets).mean_loss();
    };
    LstmState s0;
    s0.h = params.h0;
    s0.c = params.c0;
    const auto trace = forward_window(params, s0, chars, positions, targets);
    const Gradients analytic = backward_window(params, trace);
    const Gradients numeric = finite_difference_grad(params, loss_fn);

    double max_err = 0.0;
    zip_tensors(analytic, numeric,
                [&](const std::vector<double>& a, const std::vector<double>& n) {
                  for (std::size_t i = 0; i < a.size(); ++i)
                    max_err = std::max(max_err, relative_error(a[i], n[i]));
                });
    CHECK(max_err < 1e-4);
  }
}

TEST_CASE("backward_window: mean reductions of the two loss placements are consistent") {
  // n * grad(mean of all) == (n-1) * grad(mean of all-but-final) + grad(final)
  Rng rng(8);
  const std::size_t V = 5, H = 4, k2 = 4;
  ModelParams params = init_params(rng.next(), V, H);
  std::vector<int> chars{0, 2, 4, 1};
  std::vector<int> targets{2, 4, 1, 3};
  LstmState s0;
  s0.h = params.h0;
  s0.c = params.c0;

  const auto g_all = backward_window(
      params, forward_window(params, s0, chars, all_positions(k2), targets));
  const auto g_final = backward_window(
      params,
      forward_window(params, s0, chars, std::vector<std::size_t>{k2 - 1}, targets));
  const auto g_head = backward_window(
      params,
      forward_window(params, s0, chars, all_positions(k2 - 1), targets));

  const double n = double(k2);
  std::vector<const std::vector<double>*> ta, tf, th;
  for_each_tensor(g_all, [&](const std::vector<double>& t) { ta.push_back(&t); });
  for_each_tensor(g_final, [&](const std::vector<double>& t) { tf.push_back(&t); });
  for_each_tensor(g_head, [&](const std::vector<double>& t) { th.push_back(&t); });
  for (std::size_t ti = 0; ti < ta.size(); ++ti) {
    for (std::size_t i = 0; i < ta[ti]->size(); ++i) {
      const double lhs = n * (*ta[ti])[i];
      const double rhs = (n - 1.0) * (*th[ti])[i] + (*tf[ti])[i];
      const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-6});
      CHECK(std::abs(lhs - rhs) / scale < 1e-12);
    }
  }
}

TEST_CASE("backward_window: carried windows are truncated at their initial state") {
  Rng rng(31);
  const std::size_t V = 4, H = 3;
  ModelParams params = init_params(rng.next(), V, H);
  for (auto& x : params.h0) x = rng.uniform_real(-0.4, 0.4);
  for (auto& x : params.c0) x = rng.uniform_real(-0.4, 0.4);

  LstmState carried(H);
  for (auto& x : carried.h) x = rng.uniform_real(-0.6, 0.6);
  for (auto& x : carried.c) x = rng.uniform_real(-0.6, 0.6);

  std::vector<int> chars{1, 0, 3};
  std::vector<int> targets{0, 3, 2};
  const auto positions = all_positions(3);

  // The oracle also treats the window's initial state as a constant: the loss
  // starts from the fixed carried state, so it never depends on h0/c0.
  auto loss_fn = [&](const ModelParams& q) {
    return forward_window(q, carried, chars, positions, targets,
                          StateOrigin::carried)
        .mean_loss();
  };
  const auto trace =
      forward_window(params, carried, chars, positions, targets, StateOrigin::carried);
  const Gradients analytic = backward_window(params, trace);
  const Gradients numeric = finite_difference_grad(params, loss_fn);

  for (double x : analytic.h0) CHECK(x == 0.0);
  for (double x : analytic.c0) CHECK(x == 0.0);

  double max_err = 0.0;
  zip_tensors(analytic, numeric,
              [&](const std::vector<double>& a, const std::vector<double>& nn) {
                for (std::size_t i = 0; i < a.size(); ++i)
                  max_err = std::max(max_err, relative_error(a[i], nn[i]));
              });
  CHECK(max_err < 1e-4);
}

TEST_CASE("finite_difference_grad: quadratic probe and constant loss") {
  ModelParams p = init_params(5, 3, 2);
  for_each_tensor(p, [](std::vector<double>& t) {
    for (double& x : t) x = 1.0;
  });
  const Gradients g = finite_difference_grad(p, [](const ModelParams& q) {
    double s = 0.0;
    for_each_tensor(q, [&](const std::vector<double>& t) {
      for (double x : t) s += x * x;
    });
    return s;
  });
  for_each_tensor(g, [](const std::vector<double>& t) {
    for (double x : t) CHECK(x == doctest::Approx(2.0).epsilon(1e-8));
  });

  const Gradients z =
      finite_difference_grad(p, [](const ModelParams&) { return 3.5; });
  for_each_tensor(z, [](const std::vector<double>& t) {
    for (double x : t) CHECK(x == 0.0);
  });
}

TEST_CASE("gradient check harness reports small errors on tiny models") {
  const GradCheckReport report = run_gradient_check(99, 2);
  CHECK(report.cases.size() == 4);  // two placements per config
  CHECK(report.max_rel_error < 1e-4);
}
