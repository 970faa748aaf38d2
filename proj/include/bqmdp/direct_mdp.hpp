#pragma once

#include <cstddef>
#include <vector>

#include "bqmdp/problems.hpp"

namespace bqmdp {

// State of the per-instance direct MDP: the original instance (never
// mutated) plus the partial solution built so far.
struct DirectState {
  ProblemInstance instance;
  PartialSolution partial;
};

// A step or the neutral (stop-and-stay) action.
struct Action {
  bool neutral = false;
  Step step;
};

struct Transition {
  Action action;
  double reward = 0.0;
  DirectState next;
};

DirectState initial_state(const ProblemInstance& inst);

// The finite, nonempty action set: step z iff partial∘z stays extendable,
// neutral iff the partial is itself feasible. Throws DeadEnd if the list
// would be empty (a broken problem definition; must never fire).
std::vector<Action> allowed_actions(const DirectState& s);

// Applies one action. Step rewards are f(x) - f(x∘z) with both objective
// values evaluated from scratch on the original instance; neutral keeps the
// state with reward exactly 0. Throws IllegalAction on a bad action.
Transition apply(const DirectState& s, const Action& a);

struct TrajectoryOutcome {
  PartialSolution outcome;
  double total_reward = 0.0;
};

// Exhaustively enumerates every trajectory from the empty solution up to its
// first neutral action; tiny instances only. Throws BudgetExceeded when the
// search tree exceeds node_budget.
std::vector<TrajectoryOutcome> enumerate_trajectories(const ProblemInstance& inst,
                                                      std::size_t node_budget = 1u << 22);

}  // namespace bqmdp
