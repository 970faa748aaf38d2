#include "bqmdp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "bqmdp/bq_mdp.hpp"
#include "bqmdp/direct_mdp.hpp"
#include "bqmdp/generate.hpp"

namespace bqmdp {

namespace {

std::string solution_key(const PartialSolution& x) {
  std::string key;
  for (const Step& z : x.steps()) {
    key += std::to_string(z.node);
    key += z.via_depot ? 'v' : '.';
  }
  return key;
}

void cvrp_sequences(const ProblemInstance& inst, std::vector<Step>& prefix,
                    std::vector<bool>& used, std::vector<PartialSolution>& out) {
  if (prefix.size() == inst.active.size()) {
    out.emplace_back(MonoidKind::Sequence, prefix);
    return;
  }
  for (std::size_t i = 0; i < inst.active.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    for (bool via : {false, true}) {
      prefix.push_back(Step{inst.active[i], via});
      // Feasibility straight from the definition: per depot-free segment,
      // cumulated demand within the segment budget (origin leg uses the
      // remaining capacity, depot-rooted legs the full one).
      double seg_budget = inst.capacity;
      double seg_load = 0.0;
      bool ok = true;
      for (const Step& s : prefix) {
        if (s.via_depot) {
          seg_budget = inst.full_capacity;
          seg_load = 0.0;
        }
        seg_load += inst.data->demand[s.node];
        if (seg_load > seg_budget) {
          ok = false;
          break;
        }
      }
      if (ok) cvrp_sequences(inst, prefix, used, out);
      prefix.pop_back();
    }
    used[i] = false;
  }
}

void op_sequences(const ProblemInstance& inst, std::vector<Step>& prefix,
                  std::vector<bool>& used, double walk, int last,
                  std::vector<PartialSolution>& out) {
  // Any sequence whose walk plus the return edge fits the budget is feasible.
  if (walk + inst.data->dist(last, inst.destination) <= inst.capacity)
    out.emplace_back(MonoidKind::Sequence, prefix);
  for (std::size_t i = 0; i < inst.active.size(); ++i) {
    if (used[i]) continue;
    const int node = inst.active[i];
    const double grown = walk + inst.data->dist(last, node);
    if (grown + inst.data->dist(node, inst.destination) > inst.capacity) continue;
    used[i] = true;
    prefix.push_back(Step{node, false});
    op_sequences(inst, prefix, used, grown, node, out);
    prefix.pop_back();
    used[i] = false;
  }
}

}  // namespace

std::vector<PartialSolution> brute_force_feasible_set(const ProblemInstance& inst) {
  const std::size_t n = inst.active.size();
  std::vector<PartialSolution> out;
  switch (inst.problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp: {
      if (n > 9) throw Error(ErrorCategory::SizeLimit, "brute force: too many nodes");
      std::vector<int> perm = inst.active;
      do {
        std::vector<Step> steps;
        for (int q : perm) steps.push_back(Step{q, false});
        out.emplace_back(MonoidKind::Sequence, std::move(steps));
      } while (std::next_permutation(perm.begin(), perm.end()));
      return out;
    }
    case Problem::PathCvrp: {
      if (n > 8) throw Error(ErrorCategory::SizeLimit, "brute force: too many customers");
      std::vector<Step> prefix;
      std::vector<bool> used(n, false);
      cvrp_sequences(inst, prefix, used, out);
      return out;
    }
    case Problem::PathOp: {
      if (n > 9) throw Error(ErrorCategory::SizeLimit, "brute force: too many nodes");
      std::vector<Step> prefix;
      std::vector<bool> used(n, false);
      op_sequences(inst, prefix, used, 0.0, inst.origin, out);
      return out;
    }
    case Problem::Kp: {
      if (n > 20) throw Error(ErrorCategory::SizeLimit, "brute force: too many items");
      for (std::size_t s = 0; s < (std::size_t{1} << n); ++s) {
        double load = 0.0;
        std::vector<Step> steps;
        for (std::size_t i = 0; i < n; ++i)
          if (s & (std::size_t{1} << i)) {
            load += inst.data->weight[inst.active[i]];
            steps.push_back(Step{inst.active[i], false});
          }
        if (load <= inst.capacity) out.emplace_back(MonoidKind::ItemSet, std::move(steps));
      }
      return out;
    }
  }
  return out;
}

std::vector<PartialSolution> brute_force_argmin(const ProblemInstance& inst) {
  std::vector<PartialSolution> feasible = brute_force_feasible_set(inst);
  double best = 0.0;
  bool first = true;
  for (const PartialSolution& x : feasible) {
    const double f = objective(inst, x);
    if (first || f < best) {
      best = f;
      first = false;
    }
  }
  std::vector<PartialSolution> out;
  for (PartialSolution& x : feasible)
    if (objective(inst, x) <= best + 1e-9) out.push_back(std::move(x));
  return out;
}

PartialSolution random_partial(const ProblemInstance& inst, Rng& rng) {
  const PartialSolution full = random_rollout(inst, rng);
  const std::size_t len = static_cast<std::size_t>(rng.next_int(0, full.size()));
  if (inst.monoid_kind() == MonoidKind::ItemSet)
    return PartialSolution(MonoidKind::ItemSet,
                           std::vector<Step>(full.steps().begin(), full.steps().begin() + len));
  return PartialSolution(MonoidKind::Sequence,
                         std::vector<Step>(full.steps().begin(), full.steps().begin() + len));
}

PartialSolution random_rollout(const ProblemInstance& inst, Rng& rng) {
  ProblemInstance state = inst;
  PartialSolution partial = PartialSolution::empty(inst.monoid_kind());
  while (true) {
    const std::vector<Step> steps = allowed_steps(state);
    if (steps.empty()) break;
    const Step z = steps[static_cast<std::size_t>(rng.next_int(0, steps.size() - 1))];
    partial.push(z);
    state = reduce(state, z).next;
  }
  return partial;
}

namespace {

ProblemInstance random_suite_instance(Problem problem, int decisions, Rng& rng) {
  GenOptions opts;
  switch (problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp:
      return generate_instance(problem, decisions + 1, rng, opts);
    case Problem::PathCvrp:
      opts.cvrp_capacity = static_cast<double>(rng.next_int(10, 20));
      return generate_instance(problem, decisions, rng, opts);
    case Problem::PathOp:
      opts.op_budget = 0.5 + 2.0 * rng.next_double();
      return generate_instance(problem, decisions, rng, opts);
    case Problem::Kp:
      opts.kp_capacity = 0.5 + 0.25 * decisions * rng.next_double();
      return generate_instance(problem, decisions, rng, opts);
  }
  throw Error(ErrorCategory::InvalidConfig, "bad problem");
}

}  // namespace

SuiteResult bisimulation_suite(Problem problem, int triples, std::uint64_t seed) {
  SuiteResult result;
  Rng rng(seed);
  for (int t = 0; t < triples; ++t) {
    const int decisions = static_cast<int>(rng.next_int(3, 9));
    const ProblemInstance inst = random_suite_instance(problem, decisions, rng);
    const PartialSolution partial = random_partial(inst, rng);
    // Sample from the instance's whole step alphabet: forbidden steps (already
    // used nodes, over-budget moves) must agree on both sides too.
    Step z{inst.active[static_cast<std::size_t>(rng.next_int(0, inst.active.size() - 1))],
           problem == Problem::PathCvrp && rng.next_int(0, 1) == 1};
    const BisimReport report = check_bisimulation(inst, partial, z);
    char what[160];
    std::snprintf(what, sizeof(what), "triple %d: leg %s (%s)", t,
                  bisim_leg_name(report.first_violation), report.detail.c_str());
    result.note(report.pass, what);
  }
  return result;
}

SuiteResult soundness_suite(Problem problem, int instances, int max_decisions,
                            std::uint64_t seed) {
  SuiteResult result;
  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    const int decisions = static_cast<int>(rng.next_int(2, max_decisions));
    const ProblemInstance inst = random_suite_instance(problem, decisions, rng);
    const std::string tag = "instance " + std::to_string(i);

    const std::vector<TrajectoryOutcome> trajectories = enumerate_trajectories(inst);
    const std::vector<PartialSolution> feasible = brute_force_feasible_set(inst);

    std::set<std::string> outcome_keys, feasible_keys;
    for (const TrajectoryOutcome& t : trajectories) outcome_keys.insert(solution_key(t.outcome));
    for (const PartialSolution& x : feasible) feasible_keys.insert(solution_key(x));
    result.note(outcome_keys == feasible_keys, tag + ": outcome set != feasible set");

    bool telescopes = true;
    double best_return = -1e300;
    for (const TrajectoryOutcome& t : trajectories) {
      if (std::abs(t.total_reward + objective(inst, t.outcome)) > 1e-9) telescopes = false;
      best_return = std::max(best_return, t.total_reward);
    }
    result.note(telescopes, tag + ": return != -f(outcome)");

    std::set<std::string> argmax_keys, argmin_keys;
    for (const TrajectoryOutcome& t : trajectories)
      if (t.total_reward >= best_return - 1e-9) argmax_keys.insert(solution_key(t.outcome));
    for (const PartialSolution& x : brute_force_argmin(inst))
      argmin_keys.insert(solution_key(x));
    result.note(argmax_keys == argmin_keys, tag + ": max-return set != brute-force argmin");

    // A fixed policy over reduced states must trace the same labelled path
    // through both MDPs.
    auto pick = [](const ProblemInstance& state) -> int {
      const std::vector<Step> steps = allowed_steps(state);
      if (steps.empty()) return -1;
      return static_cast<int>(std::hash<std::string>{}(state_key(state)) % steps.size());
    };
    bool same_sequences = true;
    DirectState direct = initial_state(inst);
    ProblemInstance reduced = inst;
    while (true) {
      const ProblemInstance lifted = phi(direct.instance, direct.partial);
      if (!same_state(lifted, reduced)) {
        same_sequences = false;
        break;
      }
      const int choice = pick(reduced);
      const int lifted_choice = pick(lifted);
      if (choice != lifted_choice) {
        same_sequences = false;
        break;
      }
      if (choice < 0) break;
      const Step z = allowed_steps(reduced)[choice];
      const Transition t = apply(direct, Action{false, z});
      const ReduceResult r = reduce(reduced, z);
      if (std::abs(t.reward - r.reward) > 1e-9) {
        same_sequences = false;
        break;
      }
      direct = t.next;
      reduced = r.next;
    }
    result.note(same_sequences, tag + ": policy rollout diverged between MDPs");
  }
  return result;
}

}  // namespace bqmdp
