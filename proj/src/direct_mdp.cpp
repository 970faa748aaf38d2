#include "bqmdp/direct_mdp.hpp"

namespace bqmdp {

DirectState initial_state(const ProblemInstance& inst) {
  return DirectState{inst, PartialSolution::empty(inst.monoid_kind())};
}

std::vector<Action> allowed_actions(const DirectState& s) {
  const ProblemInstance reduced = phi(s.instance, s.partial);
  std::vector<Action> actions;
  for (const Step& z : allowed_steps(reduced)) actions.push_back(Action{false, z});
  if (is_complete(reduced)) actions.push_back(Action{true, {}});
  if (actions.empty())
    throw Error(ErrorCategory::DeadEnd, "allowed_actions: no action from a reachable state");
  return actions;
}

Transition apply(const DirectState& s, const Action& a) {
  if (a.neutral) {
    const ProblemInstance reduced = phi(s.instance, s.partial);
    if (!is_complete(reduced))
      throw Error(ErrorCategory::IllegalAction, "apply: neutral action at an incomplete state");
    return Transition{a, 0.0, s};
  }
  const ProblemInstance reduced = phi(s.instance, s.partial);
  if (!step_allowed(reduced, a.step))
    throw Error(ErrorCategory::IllegalAction, "apply: step not allowed");
  DirectState next{s.instance, compose(s.partial, PartialSolution::single(
                                                      s.partial.kind(), a.step))};
  const double reward =
      objective(s.instance, s.partial) - objective(s.instance, next.partial);
  return Transition{a, reward, std::move(next)};
}

namespace {

void enumerate_rec(const ProblemInstance& inst, const ProblemInstance& reduced,
                   PartialSolution& partial, double reward_sum, std::size_t node_budget,
                   std::size_t& nodes, std::vector<TrajectoryOutcome>& out) {
  if (++nodes > node_budget)
    throw Error(ErrorCategory::BudgetExceeded, "enumerate_trajectories: budget exceeded");
  const std::vector<Step> steps = allowed_steps(reduced);
  if (is_complete(reduced)) {
    // A trajectory ends at its first neutral action; siblings that keep
    // stepping are explored below.
    out.push_back(TrajectoryOutcome{partial, reward_sum});
  } else if (steps.empty()) {
    throw Error(ErrorCategory::DeadEnd, "enumerate_trajectories: dead end reached");
  }
  for (const Step& z : steps) {
    PartialSolution grown = compose(partial, PartialSolution::single(partial.kind(), z));
    const double reward = objective(inst, partial) - objective(inst, grown);
    std::swap(partial, grown);
    enumerate_rec(inst, reduce(reduced, z).next, partial, reward_sum + reward, node_budget,
                  nodes, out);
    std::swap(partial, grown);
  }
}

}  // namespace

std::vector<TrajectoryOutcome> enumerate_trajectories(const ProblemInstance& inst,
                                                      std::size_t node_budget) {
  std::vector<TrajectoryOutcome> out;
  PartialSolution partial = PartialSolution::empty(inst.monoid_kind());
  std::size_t nodes = 0;
  enumerate_rec(inst, inst, partial, 0.0, node_budget, nodes, out);
  return out;
}

}  // namespace bqmdp
