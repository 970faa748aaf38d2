#pragma once

#include <functional>

#include "bqmdp/policy.hpp"
#include "bqmdp/problems.hpp"

namespace bqmdp {

// Log-probabilities over the action space of a reduced state (masked entries
// -inf). The model-backed version is policy_scores; tests can plug in tabular
// policies.
using ScoreFn = std::function<std::vector<double>(const ProblemInstance&)>;

struct SearchOptions {
  // Model input restricted to the k active nodes nearest the current origin
  // (destination/depot always kept); 0 disables. The environment itself is
  // never restricted.
  int knn = 0;
  // Beam final selection: best objective among completed beams (default) or
  // highest cumulative log-probability.
  bool select_by_logprob = false;
};

struct RolloutResult {
  PartialSolution solution;
  double objective = 0.0;  // f-value on the original instance
  double log_prob = 0.0;   // cumulative log-probability of the action sequence
};

// The model-input view for one decision: active set cut to the k nodes
// nearest the origin (Euclidean, or smallest outgoing cost for ATSP). With
// k >= |active| this is the instance itself, bit for bit. KP has no origin;
// its view is always unrestricted.
ProblemInstance knn_restrict(const ProblemInstance& inst, int k);

// Per-step argmax over allowed actions, ties to the lowest action index,
// until the environment emits the neutral action.
RolloutResult greedy_rollout(const ScoreFn& scores, const ProblemInstance& inst,
                             const SearchOptions& opts = {});
RolloutResult greedy_rollout(const PolicyModel& model, const ProblemInstance& inst,
                             const SearchOptions& opts = {});

// Top-B frontier by cumulative log-probability; exhausted beams move to the
// completed pool and the answer is picked per SearchOptions. Width 1
// reproduces greedy_rollout exactly.
RolloutResult beam_search(const ScoreFn& scores, const ProblemInstance& inst, int width,
                          const SearchOptions& opts = {});
RolloutResult beam_search(const PolicyModel& model, const ProblemInstance& inst, int width,
                          const SearchOptions& opts = {});

}  // namespace bqmdp
