#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "bqmdp/direct_mdp.hpp"
#include "bqmdp/generate.hpp"
#include "bqmdp/search.hpp"

using namespace bqmdp;

namespace {

PolicyModel untrained(Problem p, std::uint64_t seed) {
  PolicyModel model(PolicyConfig::for_problem(p, 16, 32, 4, 2));
  model.init_weights(seed);
  // push the rezero scalars off zero so attention participates
  for (const auto& l : model.layout().layers) {
    model.params()[l.alpha_attn] = 0.2;
    model.params()[l.alpha_ffn] = 0.1;
    if (model.config().graph_conv) model.params()[l.alpha_g] = 0.15;
  }
  return model;
}

// Optimal return-to-go per reduced state, memoized; the basis of the
// oracle-perfect tabular policy.
double optimal_value(const ProblemInstance& state,
                     std::unordered_map<std::string, double>& memo) {
  const std::string key = state_key(state);
  const auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  double best = is_complete(state) ? 0.0 : -std::numeric_limits<double>::infinity();
  for (const Step& z : allowed_steps(state)) {
    const ReduceResult r = reduce(state, z);
    best = std::max(best, r.reward + optimal_value(r.next, memo));
  }
  memo[key] = best;
  return best;
}

}  // namespace

TEST_CASE("one-customer instance is solved regardless of the weights") {
  auto d = std::make_shared<InstanceData>();
  d->xs = {0.1, 0.9, 0.5};
  d->ys = {0.1, 0.9, 0.4};
  const ProblemInstance tsp = make_path_tsp(d, {2}, 0, 1);
  for (std::uint64_t seed : {1, 2, 3}) {
    const RolloutResult r = greedy_rollout(untrained(Problem::PathTsp, seed), tsp);
    REQUIRE(r.solution.steps() == std::vector<Step>{Step{2, false}});
  }
}

TEST_CASE("greedy rollouts always end feasible") {
  for (Problem p : {Problem::PathTsp, Problem::PathAtsp, Problem::PathCvrp, Problem::PathOp,
                    Problem::Kp}) {
    const PolicyModel model = untrained(p, 10 + static_cast<int>(p));
    Rng rng(500 + static_cast<int>(p));
    for (int t = 0; t < 300; ++t) {
      const ProblemInstance inst =
          generate_instance(p, 4 + static_cast<int>(rng.next_int(0, 5)), rng);
      const RolloutResult r = greedy_rollout(model, inst);
      REQUIRE(partial_feasible(inst, r.solution));
      REQUIRE(r.log_prob <= 1e-12);
    }
  }
}

TEST_CASE("an oracle-perfect tabular policy rolls out to the optimum") {
  for (Problem p : {Problem::PathTsp, Problem::PathCvrp, Problem::PathOp, Problem::Kp}) {
    Rng rng(600 + static_cast<int>(p));
    for (int rep = 0; rep < 10; ++rep) {
      const ProblemInstance inst = generate_instance(p, 6, rng);
      std::unordered_map<std::string, double> memo;
      const ScoreFn tabular = [&memo](const ProblemInstance& state) {
        const int out = state.problem == Problem::PathCvrp ? 2 : 1;
        const std::vector<int> tokens = token_nodes(state);
        std::vector<double> scores(tokens.size() * out,
                                   -std::numeric_limits<double>::infinity());
        const std::vector<bool> mask = feasibility_mask(state);
        for (std::size_t t = 0; t < tokens.size(); ++t)
          for (int c = 0; c < out; ++c) {
            if (!mask[t * out + c]) continue;
            const ReduceResult r = reduce(state, Step{tokens[t], c == 1});
            // scaled action values stand in for log-probabilities
            scores[t * out + c] = r.reward + optimal_value(r.next, memo);
          }
        return scores;
      };
      const RolloutResult rolled = greedy_rollout(tabular, inst);
      double best_return = -1e300;
      for (const auto& t : enumerate_trajectories(inst))
        best_return = std::max(best_return, t.total_reward);
      REQUIRE(rolled.objective == doctest::Approx(-best_return).epsilon(1e-9));
    }
  }
}

TEST_CASE("beam width one is bit-identical to greedy") {
  for (Problem p : {Problem::PathTsp, Problem::PathAtsp, Problem::PathCvrp, Problem::PathOp,
                    Problem::Kp}) {
    const PolicyModel model = untrained(p, 20 + static_cast<int>(p));
    Rng rng(700 + static_cast<int>(p));
    for (int t = 0; t < 50; ++t) {
      const ProblemInstance inst = generate_instance(p, 6, rng);
      const RolloutResult g = greedy_rollout(model, inst);
      const RolloutResult b = beam_search(model, inst, 1);
      REQUIRE(g.solution == b.solution);
      REQUIRE(g.objective == b.objective);
      REQUIRE(g.log_prob == b.log_prob);
    }
  }
}

TEST_CASE("a wide-enough beam finds the enumeration optimum") {
  for (Problem p : {Problem::PathTsp, Problem::PathCvrp, Problem::PathOp, Problem::Kp}) {
    const PolicyModel model = untrained(p, 30 + static_cast<int>(p));
    Rng rng(800 + static_cast<int>(p));
    for (int rep = 0; rep < 5; ++rep) {
      const ProblemInstance inst = generate_instance(p, 5, rng);
      const auto trajectories = enumerate_trajectories(inst);
      double best_return = -1e300;
      for (const auto& t : trajectories)
        best_return = std::max(best_return, t.total_reward);
      const RolloutResult wide =
          beam_search(model, inst, static_cast<int>(trajectories.size()) + 1);
      REQUIRE(wide.objective == doctest::Approx(-best_return).epsilon(1e-9));
    }
  }
}

TEST_CASE("knn restriction with k >= n is a bitwise no-op") {
  for (Problem p : {Problem::PathTsp, Problem::PathAtsp, Problem::PathCvrp, Problem::PathOp}) {
    const PolicyModel model = untrained(p, 40 + static_cast<int>(p));
    Rng rng(900 + static_cast<int>(p));
    for (int t = 0; t < 25; ++t) {
      const ProblemInstance inst = generate_instance(p, 7, rng);
      SearchOptions restricted;
      restricted.knn = 100;
      const RolloutResult a = greedy_rollout(model, inst);
      const RolloutResult b = greedy_rollout(model, inst, restricted);
      REQUIRE(a.solution == b.solution);
      REQUIRE(a.objective == b.objective);
      REQUIRE(a.log_prob == b.log_prob);
    }
  }
}

TEST_CASE("restricted rollouts stay feasible") {
  for (Problem p : {Problem::PathTsp, Problem::PathCvrp, Problem::PathOp}) {
    const PolicyModel model = untrained(p, 50 + static_cast<int>(p));
    Rng rng(1000 + static_cast<int>(p));
    SearchOptions opts;
    opts.knn = 3;
    for (int t = 0; t < 200; ++t) {
      const ProblemInstance inst = generate_instance(p, 9, rng);
      const RolloutResult r = greedy_rollout(model, inst, opts);
      REQUIRE(partial_feasible(inst, r.solution));
    }
  }
}

TEST_CASE("knn view keeps the destination and the nearest actives") {
  auto d = std::make_shared<InstanceData>();
  d->xs = {0.0, 1.0, 0.1, 0.2, 0.9};
  d->ys = {0.0, 1.0, 0.0, 0.0, 0.9};
  const ProblemInstance tsp = make_path_tsp(d, {2, 3, 4}, 0, 1);
  const ProblemInstance view = knn_restrict(tsp, 2);
  CHECK(view.active == std::vector<int>{2, 3});
  CHECK(view.origin == 0);
  CHECK(view.destination == 1);
  // environment state untouched by construction: original instance unchanged
  CHECK(tsp.active == std::vector<int>{2, 3, 4});
}
