#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bqmdp/core.hpp"

namespace bqmdp {

enum class Problem { PathTsp, PathAtsp, PathCvrp, PathOp, Kp };

const char* problem_name(Problem p);
Problem problem_from_name(const std::string& name);

// Immutable per-instance arrays, shared by all states reduced from one
// instance. Nodes (or items) are indexed 0..node_count-1.
struct InstanceData {
  // Routing geometry (TSP/CVRP/OP).
  std::vector<double> xs, ys;
  // ATSP travel costs, row-major node_count x node_count; zero diagonal.
  std::vector<double> cost;
  // Random node identifiers, row-major ident_dim x node_count. Mandatory
  // model input for ATSP, optional extra feature channel elsewhere.
  std::vector<double> ident;
  int ident_dim = 0;
  // CVRP customer demands (0 at the depot).
  std::vector<int> demand;
  // OP prizes (0 at the depot).
  std::vector<double> prize;
  // KP item features.
  std::vector<double> weight, value;

  int node_count() const;
  double dist(int i, int j) const;
};

// A COP instance in the parametric form shared by all five problems. Because
// every tail subproblem is an instance of the same problem, this one struct
// is both the initial instance and the BQ-MDP state: reduction rewrites
// origin/active/registers and leaves `data` untouched.
//
//   PathTsp/PathAtsp: active customers, origin, destination (origin ==
//     destination encodes a closed-tour start).
//   PathCvrp: active customers, origin (node or depot), destination = depot,
//     capacity = remaining c, full_capacity = C.
//   PathOp: active customers, origin, destination = depot, capacity =
//     remaining distance budget.
//   Kp: active items, capacity = remaining knapsack capacity.
struct ProblemInstance {
  Problem problem = Problem::PathTsp;
  std::shared_ptr<const InstanceData> data;
  std::vector<int> active;  // sorted unvisited customer / unpicked item ids
  int origin = -1;
  int destination = -1;
  double capacity = 0.0;
  double full_capacity = 0.0;

  MonoidKind monoid_kind() const {
    return problem == Problem::Kp ? MonoidKind::ItemSet : MonoidKind::Sequence;
  }
};

ProblemInstance make_path_tsp(std::shared_ptr<const InstanceData> data,
                              std::vector<int> active, int origin, int destination);
ProblemInstance make_path_atsp(std::shared_ptr<const InstanceData> data,
                               std::vector<int> active, int origin, int destination);
ProblemInstance make_path_cvrp(std::shared_ptr<const InstanceData> data,
                               std::vector<int> active, int depot, int origin,
                               double remaining_capacity, double full_capacity);
ProblemInstance make_path_op(std::shared_ptr<const InstanceData> data,
                             std::vector<int> active, int origin, int depot,
                             double remaining_budget);
ProblemInstance make_kp(std::shared_ptr<const InstanceData> data,
                        std::vector<int> active, double remaining_capacity);

// --- Objective -------------------------------------------------------------

// f(partial) built on top of `inst`, normalized so f(empty) = 0. Routing
// problems: travelled distance of the flattened walk from inst.origin,
// including the closing edge to the destination/depot once every active
// customer is covered. OP: minus the sum of collected prizes. KP: minus the
// sum of picked values. Evaluated from scratch; the incremental reduce()
// rewards are checked against this in the bisimulation suite.
double objective(const ProblemInstance& inst, const PartialSolution& partial);

// The walk as a node sequence, origin first, depot visits inlined, final
// destination appended when the partial covers all active customers.
// Routing problems only.
std::vector<int> flatten_walk(const ProblemInstance& inst, const PartialSolution& partial);

// --- Feasibility -----------------------------------------------------------

// partial ∈ X̄: the partial solution can be extended to a feasible one.
// Checked directly on `inst` (distinctness, running capacity/budget), not
// through the reduction path.
bool partial_extendable(const ProblemInstance& inst, const PartialSolution& partial);

// partial ∈ X: the partial solution is itself feasible for `inst`.
bool partial_feasible(const ProblemInstance& inst, const PartialSolution& partial);

// ε ∈ X for this (possibly reduced) instance.
bool is_complete(const ProblemInstance& inst);

// Exactly the steps z with X*z nonempty, in ascending (node, via) order.
std::vector<Step> allowed_steps(const ProblemInstance& inst);

// True iff z is in allowed_steps(inst); O(log n).
bool step_allowed(const ProblemInstance& inst, Step z);

// --- Reduction (the BQ-MDP transition) --------------------------------------

struct ReduceResult {
  ProblemInstance next;
  double reward = 0.0;
};

// One BQ-MDP step: next represents the tail subproblem after z, reward is
// -f(z) under this instance's (normalized) objective. Throws IllegalAction
// when the guard X*z != empty fails.
ReduceResult reduce(const ProblemInstance& inst, Step z);

// Left fold of reduce over partial's step decomposition; phi(inst, empty)
// is inst itself.
ProblemInstance phi(const ProblemInstance& inst, const PartialSolution& partial);

// --- Model-facing views ------------------------------------------------------

// Token layout for the policy input. Routing: [origin, destination, active...]
// (two tokens even when origin == destination). KP: [active items...].
std::vector<int> token_nodes(const ProblemInstance& inst);

// Step for a (token, column) action; column 1 is the CVRP via-depot move.
Step action_step(const ProblemInstance& inst, int token, int column);

// Feasibility mask over the model action space, row-major tokens x columns
// (columns = 2 for CVRP, else 1). All-false means terminal: the environment
// emits the neutral action itself.
std::vector<bool> feasibility_mask(const ProblemInstance& inst);

// Model input features, row-major input_dim x tokens. TSP: coords (2).
// CVRP: coords, demand/C, c/C (4). OP: coords, prize, remaining budget (4).
// KP: value, weight, remaining capacity (3). ATSP: the ident rows.
// append_ident adds the first ident row as an extra channel (non-ATSP).
std::vector<double> feature_matrix(const ProblemInstance& inst, bool append_ident = false);
int feature_dim(Problem p, int ident_dim = 0, bool append_ident = false);

// ATSP edge weights for the graph convolution: min-max normalized costs
// mapped through w = 1 - normalized (nearer nodes mix stronger), zero
// diagonal; row-major over tokens. Normalization runs per row by default,
// over the whole matrix otherwise. Empty for other problems.
std::vector<double> conv_edge_weights(const ProblemInstance& inst, bool row_minmax = true);

// --- Canonical form ----------------------------------------------------------

// Equality of reduced states: same problem/data/topology exactly, floating
// registers within 1e-9 (budgets accumulate subtraction).
bool same_state(const ProblemInstance& a, const ProblemInstance& b);

// Stable text form (sorted active set + registers), used for hashing states
// in tests and tabular policies.
std::string state_key(const ProblemInstance& inst);

}  // namespace bqmdp
