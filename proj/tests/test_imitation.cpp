#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <unordered_map>

#include "bqmdp/generate.hpp"
#include "bqmdp/imitation.hpp"
#include "bqmdp/oracles.hpp"
#include "bqmdp/search.hpp"

using namespace bqmdp;

namespace {

Dataset make_dataset(Problem p, int n, int count, std::uint64_t seed, GenOptions opts = {}) {
  Dataset ds;
  ds.problem = p;
  ds.seed = seed;
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    TrainingExample ex;
    ex.instance = generate_instance(p, n, rng, opts);
    const ExactSolution sol = solve_exact(ex.instance);
    ex.solution = sol.solution;
    ex.ref_objective = sol.objective;
    ds.items.push_back(std::move(ex));
  }
  return ds;
}

}  // namespace

TEST_CASE("cvrp subtours are emitted by ascending end capacity") {
  // depot 0; subtours A={1,2} (cap left 0), B={3,4} (5), C={5,6} (9), C=12
  auto d = std::make_shared<InstanceData>();
  d->xs = {0.5, 0.1, 0.2, 0.8, 0.9, 0.4, 0.6};
  d->ys = {0.5, 0.2, 0.1, 0.8, 0.9, 0.6, 0.4};
  d->demand = {0, 6, 6, 4, 3, 2, 1};
  const ProblemInstance cvrp = make_path_cvrp(d, {1, 2, 3, 4, 5, 6}, 0, 0, 12, 12);
  // stored solution visits B, C, A
  const PartialSolution stored(MonoidKind::Sequence,
                               {Step{3, false}, Step{4, false}, Step{5, true}, Step{6, false},
                                Step{1, true}, Step{2, false}});
  const std::vector<Step> traj = solution_to_trajectory(cvrp, stored);
  const std::vector<Step> expected{Step{1, false}, Step{2, false}, Step{3, true},
                                   Step{4, false}, Step{5, true}, Step{6, false}};
  CHECK(traj == expected);
}

TEST_CASE("tsp trajectory is one step per customer") {
  Rng rng(1);
  const ProblemInstance tsp = generate_instance(Problem::PathTsp, 8, rng);
  const ExactSolution sol = solve_exact(tsp);
  const std::vector<Step> traj = solution_to_trajectory(tsp, sol.solution);
  CHECK(traj.size() == tsp.active.size());
}

TEST_CASE("single-subtour cvrp reduces to the tsp case") {
  Rng rng(2);
  GenOptions opts;
  opts.cvrp_capacity = 1000.0;
  const ProblemInstance cvrp = generate_instance(Problem::PathCvrp, 6, rng, opts);
  const ExactSolution sol = solve_exact(cvrp);
  const std::vector<Step> traj = solution_to_trajectory(cvrp, sol.solution);
  REQUIRE(traj.size() == 6);
  for (const Step& z : traj) CHECK_FALSE(z.via_depot);
}

TEST_CASE("infeasible stored solutions are rejected") {
  Rng rng(3);
  const ProblemInstance tsp = generate_instance(Problem::PathTsp, 6, rng);
  const PartialSolution bogus(MonoidKind::Sequence, {Step{1, false}, Step{1, false}});
  CHECK_THROWS_AS(solution_to_trajectory(tsp, bogus), Error);
}

TEST_CASE("trajectory replay reproduces the stored objective exactly") {
  for (Problem p : {Problem::PathTsp, Problem::PathAtsp, Problem::PathCvrp, Problem::PathOp,
                    Problem::Kp}) {
    Rng rng(40 + static_cast<int>(p));
    for (int rep = 0; rep < 25; ++rep) {
      const ProblemInstance inst = generate_instance(p, 7, rng);
      const ExactSolution sol = solve_exact(inst);
      if (sol.solution.is_empty()) continue;
      const std::vector<Step> traj = solution_to_trajectory(inst, sol.solution);
      ProblemInstance state = inst;
      double reward_sum = 0.0;
      for (const Step& z : traj) {
        const ReduceResult r = reduce(state, z);
        reward_sum += r.reward;
        state = r.next;
      }
      REQUIRE(std::abs(-reward_sum - sol.objective) <= 1e-9);
    }
  }
}

TEST_CASE("identity sub-path returns the original instance and first action") {
  Rng rng(5);
  const ProblemInstance tsp = generate_instance(Problem::PathTsp, 9, rng);
  const std::vector<Step> traj =
      solution_to_trajectory(tsp, solve_exact(tsp).solution);
  Rng sample_rng(6);
  const TrainingSample s =
      sample_subinstance(tsp, traj, static_cast<int>(traj.size()), sample_rng);
  CHECK(same_state(s.state, tsp));
  REQUIRE(s.targets.size() == 1);
  CHECK(s.targets[0] == traj[0]);
}

TEST_CASE("sampled targets always pass the feasibility mask") {
  for (Problem p : {Problem::PathTsp, Problem::PathAtsp, Problem::PathCvrp, Problem::PathOp,
                    Problem::Kp}) {
    Rng rng(60 + static_cast<int>(p));
    int samples = 0;
    int instance_budget = 0;
    while (samples < 100000 && ++instance_budget < 4000) {
      GenOptions opts;
      if (p == Problem::PathOp) opts.op_budget = 1.0 + rng.next_double();
      if (p == Problem::Kp) opts.kp_capacity = 0.5 + rng.next_double();
      const ProblemInstance inst = generate_instance(p, 8, rng, opts);
      const ExactSolution sol = solve_exact(inst);
      if (sol.solution.is_empty()) continue;
      const std::vector<Step> traj = solution_to_trajectory(inst, sol.solution);
      for (int k = 0; k < 40; ++k) {
        const int n = static_cast<int>(rng.next_int(1, 8));
        const TrainingSample s = sample_subinstance(inst, traj, n, rng);
        const ActionTarget target = make_target(s.state, s.targets);
        const std::vector<bool> mask = feasibility_mask(s.state);
        for (int id : target.ids) REQUIRE(mask[id]);
        ++samples;
      }
    }
    CHECK(samples >= 100000);
  }
}

TEST_CASE("kp sampling keeps distractor items and targets the expert set") {
  Rng rng(7);
  GenOptions opts;
  opts.kp_capacity = 1.0;
  const ProblemInstance kp = generate_instance(Problem::Kp, 12, rng, opts);
  const ExactSolution sol = solve_exact(kp);
  REQUIRE(sol.solution.size() >= 2);
  const std::vector<Step> traj = solution_to_trajectory(kp, sol.solution);
  Rng sample_rng(8);
  const TrainingSample s = sample_subinstance(kp, traj, 2, sample_rng);
  CHECK(s.targets.size() == 2);
  // non-expert items remain available as negatives
  CHECK(s.state.active.size() > s.targets.size());
}

TEST_CASE("gap sign conventions match both optimization senses") {
  CHECK(optimality_gap(Problem::PathTsp, 105.0, 100.0) == doctest::Approx(0.05));
  CHECK(optimality_gap(Problem::PathOp, -101.0, -100.0) == doctest::Approx(-0.01));
  CHECK(optimality_gap(Problem::Kp, -99.0, -100.0) == doctest::Approx(0.01));
}

TEST_CASE("training is bit-reproducible and worker-count independent") {
  const Dataset ds = make_dataset(Problem::PathTsp, 6, 48, 900);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 16;
  cfg.seed = 42;
  cfg.embed_dim = 16;
  cfg.ff_dim = 32;
  cfg.layers = 2;
  cfg.workers = 1;
  const PolicyModel a = train(ds, nullptr, cfg);
  cfg.workers = 2;
  const PolicyModel b = train(ds, nullptr, cfg);
  REQUIRE(a.params() == b.params());
}

namespace {

// Optimal return-to-go, memoized; ties between equally-optimal actions (a
// closed tour runs equally well in both directions) count as hits.
double optimal_value(const ProblemInstance& state,
                     std::unordered_map<std::string, double>& memo) {
  const std::string key = state_key(state);
  const auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  double best = is_complete(state) ? 0.0 : -1e300;
  for (const Step& z : allowed_steps(state)) {
    const ReduceResult r = reduce(state, z);
    best = std::max(best, r.reward + optimal_value(r.next, memo));
  }
  memo[key] = best;
  return best;
}

}  // namespace

TEST_CASE("overfit run drives the loss down and per-step accuracy up") {
  const Dataset ds = make_dataset(Problem::PathTsp, 6, 100, 901);
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.batch_size = 25;
  cfg.lr = 1e-3;
  cfg.seed = 7;
  std::vector<EpochMetrics> metrics;
  const PolicyModel model = train(ds, nullptr, cfg, &metrics);
  REQUIRE(metrics.size() == 300);
  CHECK(metrics.back().loss < 0.3 * metrics.front().loss);

  // non-increasing loss trend, judged on 50-epoch window means with a small
  // allowance for minibatch noise at the plateau
  std::vector<double> windows;
  for (std::size_t w = 0; w + 50 <= metrics.size(); w += 50) {
    double mean = 0.0;
    for (std::size_t e = w; e < w + 50; ++e) mean += metrics[e].loss;
    windows.push_back(mean / 50.0);
  }
  for (std::size_t w = 1; w < windows.size(); ++w)
    CHECK(windows[w] <= windows[w - 1] * 1.05);

  int hits = 0, total = 0;
  for (const TrainingExample& ex : ds.items) {
    std::unordered_map<std::string, double> memo;
    const std::vector<Step> traj = solution_to_trajectory(ex.instance, ex.solution);
    ProblemInstance state = ex.instance;
    for (const Step& z : traj) {
      const std::vector<double> lp = policy_scores(model, state);
      int best = 0;
      for (std::size_t a = 1; a < lp.size(); ++a)
        if (lp[a] > lp[best]) best = static_cast<int>(a);
      const Step chosen{token_nodes(state)[best], false};
      const double value = optimal_value(state, memo);
      const ReduceResult r = reduce(state, chosen);
      if (r.reward + optimal_value(r.next, memo) >= value - 1e-9) ++hits;
      ++total;
      state = reduce(state, z).next;
    }
  }
  CHECK(static_cast<double>(hits) / total > 0.95);
}

TEST_CASE("untrained rezero model loss equals the embedding-only model loss") {
  // alphas are exactly zero at init, so attention cannot change the loss
  const Dataset ds = make_dataset(Problem::PathTsp, 6, 8, 902);
  PolicyModel model(PolicyConfig::for_problem(Problem::PathTsp, 16, 32, 4, 3));
  model.init_weights(55);
  PolicyModel deeper(PolicyConfig::for_problem(Problem::PathTsp, 16, 32, 4, 3));
  deeper.init_weights(55);
  Rng scramble(77);
  for (const auto& l : deeper.layout().layers)
    for (int off : {l.wq, l.wk, l.wv, l.wo})
      for (int i = 0; i < 16 * 16; ++i) deeper.params()[off + i] = scramble.next_double();
  for (const TrainingExample& ex : ds.items) {
    const auto a = policy_scores(model, ex.instance);
    const auto b = policy_scores(deeper, ex.instance);
    REQUIRE(a == b);
  }
}
