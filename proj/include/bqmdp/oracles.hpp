#pragma once

#include <vector>

#include "bqmdp/problems.hpp"

namespace bqmdp {

// Optimal origin -> destination Hamiltonian path over the active nodes
// (bitmask DP over subset x last node). order excludes origin/destination;
// cost matches objective(): origin edge + interior edges + closing edge to
// the destination, 0 for an empty active set. Ties keep the lowest node
// index. Throws SizeLimit above 22 active nodes.
struct PathSolution {
  std::vector<int> order;
  double cost = 0.0;
};
PathSolution held_karp_path(const ProblemInstance& inst);

// Exact 0/1 knapsack by depth-first branch-and-bound with a fractional
// relaxation bound; safe pruning margin so the reported optimum is exact for
// real-valued weights. picked is sorted by item index; value is the plain
// (positive) total value.
struct KpSolution {
  std::vector<int> picked;
  double value = 0.0;
};
KpSolution kp_exact(const ProblemInstance& inst);

// Exact path-CVRP: the origin leg plus depot-rooted subtours, chosen by DP
// over customer subsets with each subtour routed by Held-Karp. Throws
// SizeLimit above 10 active customers.
struct CvrpSolution {
  std::vector<std::vector<int>> subtours;
  bool first_from_origin = false;  // subtours[0] leaves the origin directly
  double cost = 0.0;
};
CvrpSolution cvrp_exact(const ProblemInstance& inst);

// Exact path-OP: best prize subset whose optimal route fits the distance
// budget (closed inequality, matching the mask convention). Throws SizeLimit
// above 10 active nodes.
struct OpSolution {
  std::vector<int> order;
  double prize = 0.0;
};
OpSolution op_exact(const ProblemInstance& inst);

// Any problem, as (partial solution, f-objective); maximization problems
// come back with their negated objective, as everywhere else.
struct ExactSolution {
  PartialSolution solution;
  double objective = 0.0;
};
ExactSolution solve_exact(const ProblemInstance& inst);

// Step sequence for a CVRP subtour list (first subtour leaves the origin
// directly, later ones go via the depot).
PartialSolution cvrp_steps(const CvrpSolution& sol);

}  // namespace bqmdp
