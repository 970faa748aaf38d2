#include "bqmdp/bq_mdp.hpp"

#include <cmath>
#include <cstdio>

namespace bqmdp {

const char* bisim_leg_name(BisimLeg leg) {
  switch (leg) {
    case BisimLeg::None: return "none";
    case BisimLeg::StateCommutation: return "state-commutation";
    case BisimLeg::RewardEquality: return "reward-equality";
    case BisimLeg::GuardEquivalence: return "guard-equivalence";
    case BisimLeg::NeutralAgreement: return "neutral-agreement";
  }
  return "?";
}

namespace {

ProblemInstance fold(const ReduceFn& reduce_fn, const ProblemInstance& inst,
                     const PartialSolution& partial) {
  ProblemInstance state = inst;
  for (const Step& z : partial.steps()) state = reduce_fn(state, z).next;
  return state;
}

}  // namespace

BisimReport check_bisimulation_with(const ReduceFn& reduce_fn, const ProblemInstance& inst,
                                    const PartialSolution& partial, Step z) {
  BisimReport report;
  auto fail = [&](BisimLeg leg, const std::string& detail) {
    report.pass = false;
    report.first_violation = leg;
    report.detail = detail;
    return report;
  };

  const ProblemInstance reduced = fold(reduce_fn, inst, partial);
  const PartialSolution grown =
      compose(partial, PartialSolution::single(inst.monoid_kind(), z));

  // Guard leg first: the remaining legs only make sense when both sides
  // agree the step is legal. The step must strictly extend the partial
  // solution: re-adding a set element composes to the same state, and such
  // degenerate self-loops are excluded from both MDPs.
  const bool direct_guard = grown.size() > partial.size() && partial_extendable(inst, grown);
  const bool reduced_guard = step_allowed(reduced, z);
  if (direct_guard != reduced_guard)
    return fail(BisimLeg::GuardEquivalence,
                std::string("direct=") + (direct_guard ? "allowed" : "forbidden") +
                    " reduced=" + (reduced_guard ? "allowed" : "forbidden"));

  if (direct_guard) {
    const ReduceResult step = reduce_fn(reduced, z);

    const ProblemInstance via_grown = fold(reduce_fn, inst, grown);
    if (!same_state(via_grown, step.next))
      return fail(BisimLeg::StateCommutation,
                  "phi(x∘z) and phi(x)*z disagree: " + state_key(via_grown) + " vs " +
                      state_key(step.next));

    const double direct_reward = objective(inst, partial) - objective(inst, grown);
    if (std::abs(direct_reward - step.reward) > 1e-9) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "direct=%.12f reduced=%.12f", direct_reward,
                    step.reward);
      return fail(BisimLeg::RewardEquality, buf);
    }
  }

  const bool direct_complete = partial_feasible(inst, partial);
  const bool reduced_complete = is_complete(reduced);
  if (direct_complete != reduced_complete)
    return fail(BisimLeg::NeutralAgreement,
                std::string("direct=") + (direct_complete ? "feasible" : "incomplete") +
                    " reduced=" + (reduced_complete ? "complete" : "incomplete"));

  return report;
}

BisimReport check_bisimulation(const ProblemInstance& inst, const PartialSolution& partial,
                               Step z) {
  return check_bisimulation_with(
      [](const ProblemInstance& state, Step step) { return reduce(state, step); }, inst,
      partial, z);
}

}  // namespace bqmdp
