#pragma once

#include <functional>
#include <string>

#include "bqmdp/problems.hpp"

namespace bqmdp {

// The four legs of the bisimulation diagram between the direct MDP and the
// reduced (instance-state) MDP, checked at one (instance, partial, step).
enum class BisimLeg {
  None,
  StateCommutation,   // phi(x∘z) == reduce(phi(x), z).next
  RewardEquality,     // f(x) - f(x∘z) == reduce reward (within 1e-9)
  GuardEquivalence,   // x∘z extendable  <=>  step allowed at phi(x)
  NeutralAgreement,   // x feasible  <=>  phi(x) complete
};

struct BisimReport {
  bool pass = true;
  BisimLeg first_violation = BisimLeg::None;
  std::string detail;
};

const char* bisim_leg_name(BisimLeg leg);

using ReduceFn = std::function<ReduceResult(const ProblemInstance&, Step)>;

// Verifies the diagram with an injectable reduction (the default is the real
// reduce); the injection point exists so tests can corrupt the reduction and
// watch the right leg fail. Failures are report payload, never exceptions.
BisimReport check_bisimulation_with(const ReduceFn& reduce_fn, const ProblemInstance& inst,
                                    const PartialSolution& partial, Step z);

BisimReport check_bisimulation(const ProblemInstance& inst, const PartialSolution& partial,
                               Step z);

}  // namespace bqmdp
