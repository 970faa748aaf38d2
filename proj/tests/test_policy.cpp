#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "bqmdp/generate.hpp"
#include "bqmdp/policy.hpp"
#include "bqmdp/verify.hpp"

using namespace bqmdp;

namespace {

// Random reachable reduced state with at least one allowed action.
ProblemInstance random_state(Problem p, int n, Rng& rng) {
  while (true) {
    const ProblemInstance inst = generate_instance(p, n, rng);
    const ProblemInstance state = phi(inst, random_partial(inst, rng));
    if (!allowed_steps(state).empty()) return state;
  }
}

ActionTarget random_target(const ProblemInstance& state, Rng& rng) {
  const std::vector<bool> mask = feasibility_mask(state);
  std::vector<int> allowed;
  for (std::size_t a = 0; a < mask.size(); ++a)
    if (mask[a]) allowed.push_back(static_cast<int>(a));
  if (state.problem == Problem::Kp && allowed.size() > 1 && rng.next_int(0, 1) == 1) {
    // exercise the multi-label path
    std::vector<int> ids;
    for (int a : allowed)
      if (rng.next_int(0, 1) == 1) ids.push_back(a);
    if (ids.size() > 1) return ActionTarget::uniform(ids);
  }
  return ActionTarget::one_hot(allowed[rng.next_int(0, allowed.size() - 1)]);
}

double loss_at(const PolicyModel& model, const ProblemInstance& state,
               const ActionTarget& target) {
  return cross_entropy(policy_scores(model, state), target);
}

// Max relative error between analytic gradients and central differences over
// every parameter.
double gradient_check(Problem p, std::uint64_t seed) {
  Rng rng(seed);
  const PolicyConfig cfg = PolicyConfig::for_problem(p, 16, 32, 4, 2);
  PolicyModel model(cfg);
  model.init_weights(rng.next_u64());
  // put the rezero scalars off zero so every block participates
  for (const auto& l : model.layout().layers) {
    model.params()[l.alpha_attn] = 0.3;
    model.params()[l.alpha_ffn] = -0.2;
    if (cfg.graph_conv) model.params()[l.alpha_g] = 0.25;
  }
  // keep relu pre-activations clear of the finite-difference step; central
  // differences are invalid across the kink
  ProblemInstance state = random_state(p, 8, rng);
  ForwardTape tape;
  while (true) {
    policy_scores(model, state, &tape);
    double min_pre = 1e300;
    for (const auto& tl : tape.layer)
      for (double v : tl.ff_pre) min_pre = std::min(min_pre, std::abs(v));
    if (min_pre > 1e-4) break;
    state = random_state(p, 8, rng);
  }
  const ActionTarget target = random_target(state, rng);
  std::vector<double> grad(model.param_count(), 0.0);
  policy_backward(model, tape, target, grad);

  const double h = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < model.param_count(); ++i) {
    const double saved = model.params()[i];
    model.params()[i] = saved + h;
    const double up = loss_at(model, state, target);
    model.params()[i] = saved - h;
    const double down = loss_at(model, state, target);
    model.params()[i] = saved;
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
    worst = std::max(worst, std::abs(fd - grad[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("analytic gradients match central differences on every head") {
  for (Problem p : {Problem::PathTsp, Problem::PathAtsp, Problem::PathCvrp, Problem::PathOp,
                    Problem::Kp}) {
    for (std::uint64_t seed : {1u, 2u}) {
      const double err = gradient_check(p, 9000 + 10 * static_cast<int>(p) + seed);
      CHECK_MESSAGE(err < 1e-4, problem_name(p) << " seed " << seed << " err " << err);
    }
  }
}

TEST_CASE("single allowed action has probability one, zero loss, zero grads") {
  auto d = std::make_shared<InstanceData>();
  d->xs = {0.2, 0.8, 0.5};
  d->ys = {0.3, 0.1, 0.9};
  const ProblemInstance tsp = make_path_tsp(d, {2}, 0, 1);
  PolicyModel model(PolicyConfig::for_problem(Problem::PathTsp, 16, 32, 4, 2));
  model.init_weights(3);
  ForwardTape tape;
  const auto lp = policy_scores(model, tsp, &tape);
  CHECK(lp[2] == 0.0);  // log 1
  CHECK(std::exp(lp[2]) == 1.0);
  const ActionTarget target = ActionTarget::one_hot(2);
  CHECK(cross_entropy(lp, target) == 0.0);
  std::vector<double> grad(model.param_count(), 0.0);
  policy_backward(model, tape, target, grad);
  for (double g : grad) REQUIRE(g == 0.0);
}

TEST_CASE("masked actions keep exactly zero probability and zero gradient") {
  Rng rng(4);
  const ProblemInstance state = random_state(Problem::PathCvrp, 6, rng);
  PolicyModel model(PolicyConfig::for_problem(Problem::PathCvrp, 16, 32, 4, 2));
  model.init_weights(5);
  const auto lp = policy_scores(model, state);
  const auto mask = feasibility_mask(state);
  double total = 0.0;
  for (std::size_t a = 0; a < mask.size(); ++a) {
    if (!mask[a]) CHECK(std::isinf(lp[a]));
    else total += std::exp(lp[a]);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("probabilities normalize over allowed actions on random states") {
  for (Problem p : {Problem::PathTsp, Problem::PathCvrp, Problem::PathOp, Problem::Kp}) {
    PolicyModel model(PolicyConfig::for_problem(p, 16, 32, 4, 2));
    model.init_weights(17 + static_cast<int>(p));
    Rng rng(2200 + static_cast<int>(p));
    for (int t = 0; t < 2500; ++t) {
      const ProblemInstance state = random_state(p, 4 + rng.next_int(0, 5), rng);
      const auto lp = policy_scores(model, state);
      double total = 0.0;
      for (double v : lp)
        if (!std::isinf(v)) total += std::exp(v);
      REQUIRE(std::abs(total - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("rezero init: output depends only on the embedding and head path") {
  Rng rng(11);
  const ProblemInstance state = random_state(Problem::PathTsp, 7, rng);
  const PolicyConfig cfg = PolicyConfig::for_problem(Problem::PathTsp, 16, 32, 4, 2);
  PolicyModel a(cfg), b(cfg);
  a.init_weights(100);
  b.init_weights(100);
  // scramble everything except embedding, tokens and head in b
  Rng scramble(999);
  for (const auto& l : b.layout().layers) {
    for (int off : {l.wq, l.wk, l.wv, l.wo})
      for (int i = 0; i < 16 * 16; ++i) b.params()[off + i] = scramble.next_double();
    for (int i = 0; i < 32 * 16; ++i) b.params()[l.w1 + i] = scramble.next_double();
    for (int i = 0; i < 16 * 32; ++i) b.params()[l.w2 + i] = scramble.next_double();
  }
  const auto lp_a = policy_scores(a, state);
  const auto lp_b = policy_scores(b, state);
  for (std::size_t i = 0; i < lp_a.size(); ++i) REQUIRE(lp_a[i] == lp_b[i]);
}

TEST_CASE("permuting input tokens permutes output probabilities bitwise") {
  Rng rng(12);
  const PolicyConfig cfg = PolicyConfig::for_problem(Problem::PathTsp, 16, 32, 4, 2);
  PolicyModel model(cfg);
  model.init_weights(7);
  for (const auto& l : model.layout().layers) {
    model.params()[l.alpha_attn] = 0.4;
    model.params()[l.alpha_ffn] = 0.2;
  }
  for (int rep = 0; rep < 50; ++rep) {
    ProblemInstance state = random_state(Problem::PathTsp, 7, rng);
    // distinct canonical ids only: a closed tour start repeats the node id
    while (state.origin == state.destination || allowed_steps(state).empty())
      state = random_state(Problem::PathTsp, 7, rng);
    const std::vector<int> ids = token_nodes(state);
    const int n = static_cast<int>(ids.size());
    const std::vector<double> f = feature_matrix(state);
    const std::vector<bool> mask = feasibility_mask(state);
    const auto base = policy_forward(model, f, n, mask, {}, ids);

    // random permutation of the token order
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n; i > 1; --i) std::swap(order[i - 1], order[rng.next_int(0, i - 1)]);
    std::vector<double> pf(f.size());
    std::vector<bool> pmask(mask.size());
    std::vector<int> pids(n);
    for (int i = 0; i < n; ++i) {
      pids[i] = ids[order[i]];
      pmask[i] = mask[order[i]];
      for (int r = 0; r < cfg.input_dim; ++r) pf[r * n + i] = f[r * n + order[i]];
    }
    int origin_at = 0, dest_at = 1;
    for (int i = 0; i < n; ++i) {
      if (order[i] == 0) origin_at = i;
      if (order[i] == 1) dest_at = i;
    }
    const auto permuted =
        policy_forward(model, pf, n, pmask, {}, pids, nullptr, origin_at, dest_at);
    for (int i = 0; i < n; ++i) REQUIRE(permuted[i] == base[order[i]]);
  }
}

TEST_CASE("all-masked input is rejected") {
  PolicyModel model(PolicyConfig::for_problem(Problem::Kp, 16, 32, 4, 1));
  model.init_weights(1);
  const std::vector<double> f(3 * 2, 0.5);
  CHECK_THROWS_AS(policy_forward(model, f, 2, {false, false}), Error);
}

TEST_CASE("parameter count is a pure function of the dimensions") {
  const PolicyConfig a = PolicyConfig::for_problem(Problem::PathTsp, 16, 32, 4, 2);
  const PolicyConfig b = PolicyConfig::for_problem(Problem::PathTsp, 16, 32, 4, 2);
  CHECK(PolicyModel(a).param_count() == PolicyModel(b).param_count());
  const int d = 16, dff = 32, L = 2, din = 2;
  const int expected = d * din + d      // embedding
                       + 2 * d          // origin/destination tokens
                       + L * (4 * d * d + 1 + dff * d + dff + d * dff + d + 1)
                       + d + 1;         // head
  CHECK(PolicyModel(a).param_count() == expected);
}

TEST_CASE("adam leaves parameters unchanged on zero gradients") {
  PolicyModel model(PolicyConfig::for_problem(Problem::PathTsp, 16, 32, 4, 1));
  model.init_weights(2);
  const std::vector<double> before = model.params();
  AdamState state;
  const std::vector<double> zeros(model.param_count(), 0.0);
  adam_step(model, zeros, state, 1e-3);
  CHECK(model.params() == before);
}

TEST_CASE("learning rate decays 0.98 every 50 epochs") {
  CHECK(lr_schedule(7.5e-4, 0) == doctest::Approx(7.5e-4));
  CHECK(lr_schedule(7.5e-4, 49) == doctest::Approx(7.5e-4));
  CHECK(lr_schedule(7.5e-4, 50) == doctest::Approx(7.5e-4 * 0.98));
  CHECK(lr_schedule(7.5e-4, 150) == doctest::Approx(7.5e-4 * 0.98 * 0.98 * 0.98));
}

TEST_CASE("adam drives a quadratic toy loss to its minimum") {
  // single parameter, loss (x - 3)^2 / 2, closed-form minimum at 3
  PolicyConfig cfg = PolicyConfig::for_problem(Problem::Kp, 1, 1, 1, 0);
  cfg.input_dim = 1;
  PolicyModel model(cfg);
  // borrow the first parameter slot as the scalar
  AdamState state;
  std::vector<double> grad(model.param_count(), 0.0);
  for (int step = 0; step < 2000; ++step) {
    grad[0] = model.params()[0] - 3.0;
    adam_step(model, grad, state, 0.3 * std::pow(0.99, step));
    std::fill(grad.begin(), grad.end(), 0.0);
  }
  CHECK(std::abs(model.params()[0] - 3.0) < 1e-6);
}

TEST_CASE("atsp edge-weight normalization modes both produce valid weights") {
  Rng rng(61);
  const ProblemInstance atsp = generate_instance(Problem::PathAtsp, 7, rng);
  const auto row = conv_edge_weights(atsp, true);
  const auto global = conv_edge_weights(atsp, false);
  const std::size_t n = token_nodes(atsp).size();
  REQUIRE(row.size() == n * n);
  REQUIRE(global.size() == n * n);
  bool differ = false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double rw = row[i * n + j], gw = global[i * n + j];
      if (i == j) {
        REQUIRE(rw == 0.0);
        REQUIRE(gw == 0.0);
      } else {
        REQUIRE((rw >= 0.0 && rw <= 1.0));
        REQUIRE((gw >= 0.0 && gw <= 1.0));
        if (rw != gw) differ = true;
      }
    }
  CHECK(differ);
  // the choice rides along in checkpoints
  PolicyConfig cfg = PolicyConfig::for_problem(Problem::PathAtsp, 16, 32, 4, 1);
  cfg.conv_row_minmax = false;
  PolicyModel model(cfg);
  model.init_weights(9);
  model.save("atsp_mode.model.json");
  CHECK_FALSE(PolicyModel::load("atsp_mode.model.json").config().conv_row_minmax);
}

TEST_CASE("checkpoints round-trip and validate shapes") {
  PolicyModel model(PolicyConfig::for_problem(Problem::PathCvrp, 16, 32, 4, 2));
  model.init_weights(8);
  const std::string path = "test_policy_ckpt.json";
  model.save(path);
  const PolicyModel loaded = PolicyModel::load(path);
  CHECK(loaded.params() == model.params());
  CHECK(loaded.config().head_outputs == 2);
  CHECK_THROWS_AS(PolicyModel::load("does_not_exist.json"), Error);
}
