#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bqmdp/common.hpp"
#include "bqmdp/problems.hpp"

namespace bqmdp {

// --- Brute-force references (independent of the MDP engines) ---------------

// Every feasible solution of a tiny instance, enumerated directly from the
// problem definition: permutations (TSP/ATSP), permutations with via-depot
// flag patterns (CVRP), ordered budget-feasible subsets (OP), weight-feasible
// subsets (KP). Throws SizeLimit when the instance is too big to enumerate.
std::vector<PartialSolution> brute_force_feasible_set(const ProblemInstance& inst);

// argmin of the objective over the brute-forced feasible set, as a set of
// solutions (ties within 1e-9 of the minimum).
std::vector<PartialSolution> brute_force_argmin(const ProblemInstance& inst);

// --- Random exploration helpers ---------------------------------------------

// A uniformly chosen allowed step sequence of random length (possibly empty);
// the prefix of a random rollout.
PartialSolution random_partial(const ProblemInstance& inst, Rng& rng);

// Random mask-allowed rollout until auto-neutral; returns the outcome.
PartialSolution random_rollout(const ProblemInstance& inst, Rng& rng);

// --- Executable proposition suites -------------------------------------------

struct SuiteResult {
  bool pass = true;
  int checked = 0;
  int failures = 0;
  std::string first_failure;

  void note(bool ok, const std::string& what) {
    ++checked;
    if (!ok) {
      ++failures;
      pass = false;
      if (first_failure.empty()) first_failure = what;
    }
  }
};

// Bisimulation legs on random (instance, partial, step) triples for one
// problem; steps are sampled from the instance's whole step alphabet so both
// allowed and forbidden guards get exercised.
SuiteResult bisimulation_suite(Problem problem, int triples, std::uint64_t seed);

// Soundness of both engines on tiny instances: exhaustive direct-MDP
// outcomes equal the brute-forced feasible set, max-return outcomes equal the
// brute-forced argmin, every trajectory return telescopes to -f(outcome),
// and a fixed reduced-state policy yields identical action/reward sequences
// through the direct MDP (lifted by phi) and the BQ-MDP.
SuiteResult soundness_suite(Problem problem, int instances, int max_decisions,
                            std::uint64_t seed);

}  // namespace bqmdp
