#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "bqmdp/generate.hpp"
#include "bqmdp/oracles.hpp"
#include "bqmdp/verify.hpp"

using namespace bqmdp;

namespace {

std::shared_ptr<InstanceData> square_coords() {
  auto d = std::make_shared<InstanceData>();
  d->xs = {0.0, 0.0, 1.0, 1.0};
  d->ys = {0.0, 1.0, 1.0, 0.0};
  return d;
}

// Reference minimum by exhaustive permutation of the active set.
double permutation_min(const ProblemInstance& inst) {
  std::vector<int> perm = inst.active;
  double best = 1e300;
  do {
    double cost = inst.data->dist(inst.origin, perm.front());
    for (std::size_t i = 1; i < perm.size(); ++i)
      cost += inst.data->dist(perm[i - 1], perm[i]);
    cost += inst.data->dist(perm.back(), inst.destination);
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("held-karp square path costs three unit edges") {
  // origin (0,0), destination (1,0), customers (0,1) and (1,1)
  const ProblemInstance tsp = make_path_tsp(square_coords(), {1, 2}, 0, 3);
  const PathSolution s = held_karp_path(tsp);
  CHECK(s.cost == doctest::Approx(3.0));
  CHECK(s.order == std::vector<int>{1, 2});
}

TEST_CASE("held-karp closed square tour costs the perimeter") {
  const ProblemInstance tsp = make_path_tsp(square_coords(), {1, 2, 3}, 0, 0);
  CHECK(held_karp_path(tsp).cost == doctest::Approx(4.0));
}

TEST_CASE("held-karp equals permutation brute force at n=9") {
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng(derive_seed(501, rep));
    const ProblemInstance tsp = generate_instance(Problem::PathTsp, 9, rng);
    CHECK(held_karp_path(tsp).cost == doctest::Approx(permutation_min(tsp)).epsilon(1e-12));
  }
}

TEST_CASE("held-karp handles asymmetric matrices") {
  for (int rep = 0; rep < 50; ++rep) {
    Rng rng(derive_seed(502, rep));
    const ProblemInstance atsp = generate_instance(Problem::PathAtsp, 7, rng);
    CHECK(held_karp_path(atsp).cost ==
          doctest::Approx(permutation_min(atsp)).epsilon(1e-12));
  }
}

TEST_CASE("symmetric path cost is invariant under endpoint swap") {
  for (int rep = 0; rep < 50; ++rep) {
    Rng rng(derive_seed(503, rep));
    ProblemInstance tsp = generate_instance(Problem::PathTsp, 8, rng);
    tsp.destination = tsp.active.back();
    tsp.active.pop_back();
    ProblemInstance swapped = tsp;
    std::swap(swapped.origin, swapped.destination);
    const PathSolution fwd = held_karp_path(tsp);
    const PathSolution rev = held_karp_path(swapped);
    CHECK(fwd.cost == doctest::Approx(rev.cost).epsilon(1e-12));
    std::vector<int> reversed(rev.order.rbegin(), rev.order.rend());
    CHECK(objective(tsp, PartialSolution(MonoidKind::Sequence, [&] {
            std::vector<Step> steps;
            for (int q : reversed) steps.push_back(Step{q, false});
            return steps;
          }())) == doctest::Approx(fwd.cost).epsilon(1e-12));
  }
}

TEST_CASE("held-karp rejects oversized instances") {
  auto d = std::make_shared<InstanceData>();
  d->xs.assign(25, 0.0);
  d->ys.assign(25, 0.0);
  std::vector<int> active(23);
  for (int i = 0; i < 23; ++i) active[i] = i + 2;
  CHECK_THROWS_AS(held_karp_path(make_path_tsp(d, active, 0, 1)), Error);
}

TEST_CASE("two items fitting exactly are both picked") {
  auto d = std::make_shared<InstanceData>();
  d->weight = {2.0, 3.0};
  d->value = {3.0, 4.0};
  CHECK(kp_exact(make_kp(d, {0, 1}, 5.0)).value == doctest::Approx(7.0));
  CHECK(kp_exact(make_kp(d, {0, 1}, 3.0)).value == doctest::Approx(4.0));
}

TEST_CASE("kp exact equals subset brute force at n=16") {
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng(derive_seed(504, rep));
    const ProblemInstance kp = generate_instance(Problem::Kp, 16, rng);
    double best = 0.0;
    for (std::size_t s = 0; s < (1u << 16); ++s) {
      double load = 0.0, value = 0.0;
      for (int i = 0; i < 16; ++i)
        if (s & (1u << i)) {
          load += kp.data->weight[i];
          value += kp.data->value[i];
        }
      if (load <= kp.capacity) best = std::max(best, value);
    }
    CHECK(kp_exact(kp).value == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("cvrp with everything under capacity is one tour") {
  Rng rng(505);
  GenOptions opts;
  opts.cvrp_capacity = 1000.0;
  const ProblemInstance cvrp = generate_instance(Problem::PathCvrp, 7, rng, opts);
  const CvrpSolution sol = cvrp_exact(cvrp);
  CHECK(sol.subtours.size() == 1);
  const ProblemInstance as_tsp =
      make_path_tsp(std::make_shared<InstanceData>(InstanceData{
                        cvrp.data->xs, cvrp.data->ys, {}, {}, 0, {}, {}, {}, {}}),
                    cvrp.active, cvrp.origin, cvrp.destination);
  CHECK(sol.cost == doctest::Approx(held_karp_path(as_tsp).cost).epsilon(1e-12));
}

TEST_CASE("cvrp exact equals order-first brute force at n=8") {
  for (int rep = 0; rep < 50; ++rep) {
    Rng rng(derive_seed(506, rep));
    GenOptions opts;
    opts.cvrp_capacity = static_cast<double>(rng.next_int(12, 20));
    const ProblemInstance cvrp = generate_instance(Problem::PathCvrp, 8, rng, opts);
    // Exhaustive over visiting orders; optimal depot returns per order by a
    // linear scan DP. Independent of the subset DP inside cvrp_exact.
    std::vector<int> perm = cvrp.active;
    double best = 1e300;
    do {
      const int m = static_cast<int>(perm.size());
      std::vector<double> dp(m + 1, 1e300);
      dp[0] = 0.0;
      for (int i = 0; i < m; ++i) {
        if (dp[i] >= 1e300) continue;
        double load = 0.0;
        double travelled = 0.0;
        int prev = cvrp.destination;  // leg starts at the depot
        for (int j = i; j < m; ++j) {
          load += cvrp.data->demand[perm[j]];
          if (load > cvrp.full_capacity) break;
          travelled += cvrp.data->dist(prev, perm[j]);
          prev = perm[j];
          const double leg = travelled + cvrp.data->dist(prev, cvrp.destination);
          dp[j + 1] = std::min(dp[j + 1], dp[i] + leg);
        }
      }
      best = std::min(best, dp[m]);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(cvrp_exact(cvrp).cost == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("cvrp exact handles mid-route states with a partial load") {
  // origin away from the depot, remaining capacity below the full one
  for (int rep = 0; rep < 30; ++rep) {
    Rng rng(derive_seed(509, rep));
    GenOptions opts;
    opts.cvrp_capacity = static_cast<double>(rng.next_int(12, 18));
    ProblemInstance state = generate_instance(Problem::PathCvrp, 7, rng, opts);
    for (int hops = static_cast<int>(rng.next_int(1, 3)); hops > 0; --hops) {
      const auto steps = allowed_steps(state);
      state = reduce(state, steps[rng.next_int(0, steps.size() - 1)]).next;
    }
    const CvrpSolution sol = cvrp_exact(state);
    const PartialSolution steps = cvrp_steps(sol);
    REQUIRE(partial_feasible(state, steps));
    REQUIRE(objective(state, steps) == doctest::Approx(sol.cost).epsilon(1e-9));
    double best = 1e300;
    for (const PartialSolution& x : brute_force_argmin(state))
      best = std::min(best, objective(state, x));
    REQUIRE(sol.cost == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("op with a generous budget collects every prize") {
  Rng rng(507);
  GenOptions opts;
  opts.op_budget = 100.0;
  const ProblemInstance op = generate_instance(Problem::PathOp, 7, rng, opts);
  double total = 0.0;
  for (int q : op.active) total += op.data->prize[q];
  CHECK(op_exact(op).prize == doctest::Approx(total));
}

TEST_CASE("op exact equals ordered-subset brute force at n=8") {
  for (int rep = 0; rep < 50; ++rep) {
    Rng rng(derive_seed(508, rep));
    GenOptions opts;
    opts.op_budget = 0.8 + 1.5 * rng.next_double();
    const ProblemInstance op = generate_instance(Problem::PathOp, 8, rng, opts);
    double best = 0.0;
    for (const PartialSolution& x : brute_force_feasible_set(op)) {
      double prize = 0.0;
      for (const Step& z : x.steps()) prize += op.data->prize[z.node];
      best = std::max(best, prize);
    }
    CHECK(op_exact(op).prize == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("oracle solutions satisfy their own feasibility predicates") {
  for (Problem p : {Problem::PathTsp, Problem::PathAtsp, Problem::PathCvrp, Problem::PathOp,
                    Problem::Kp}) {
    Rng rng(700 + static_cast<int>(p));
    for (int rep = 0; rep < 25; ++rep) {
      const ProblemInstance inst = generate_instance(p, 7, rng);
      const ExactSolution sol = solve_exact(inst);
      REQUIRE(partial_feasible(inst, sol.solution));
      REQUIRE(objective(inst, sol.solution) == doctest::Approx(sol.objective).epsilon(1e-9));
    }
  }
}

TEST_CASE("oracle cost lower-bounds a thousand random rollouts") {
  for (Problem p : {Problem::PathTsp, Problem::PathCvrp, Problem::PathOp, Problem::Kp}) {
    Rng rng(800 + static_cast<int>(p));
    const ProblemInstance inst = generate_instance(p, 7, rng);
    const double oracle = solve_exact(inst).objective;
    for (int t = 0; t < 1000; ++t) {
      const PartialSolution outcome = random_rollout(inst, rng);
      REQUIRE(oracle <= objective(inst, outcome) + 1e-9);
    }
  }
}
