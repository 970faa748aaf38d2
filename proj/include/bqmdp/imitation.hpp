#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bqmdp/policy.hpp"
#include "bqmdp/problems.hpp"

namespace bqmdp {

struct TrainingExample {
  ProblemInstance instance;
  PartialSolution solution;
  double ref_objective = 0.0;  // f-value of the stored solution
};

struct Dataset {
  Problem problem = Problem::PathTsp;
  std::vector<TrainingExample> items;
  std::uint64_t seed = 0;  // generator seed recorded in the file header
};

// Canonical construction order for a stored solution. TSP/ATSP keep the given
// order (set reverse_tour to flip a closed tour). CVRP re-emits subtours
// sorted ascending by their end-of-subtour remaining capacity, so the last
// subtour leaves the most slack. KP orders items by index. Throws
// InfeasibleSolution when the solution does not satisfy its instance.
std::vector<Step> solution_to_trajectory(const ProblemInstance& inst,
                                         const PartialSolution& solution,
                                         bool reverse_tour = false);

// One supervised pair: the tail subproblem at a random trajectory position,
// cut down to (at most) n upcoming decisions, plus the expert's next action.
// For KP the position is chosen so n decisions remain and every remaining
// expert item is a valid target. Throws TrajectoryTooShort on an empty
// trajectory.
struct TrainingSample {
  ProblemInstance state;
  std::vector<Step> targets;  // one step, or the remaining expert set for KP
};
TrainingSample sample_subinstance(const ProblemInstance& inst,
                                  const std::vector<Step>& trajectory, int n, Rng& rng);

// Action-space target for a sample of `state`.
ActionTarget make_target(const ProblemInstance& state, const std::vector<Step>& targets);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 256;
  double lr = 7.5e-4;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  int min_subpath = 4;  // sub-path node count floor: 4 nodes = 2 decisions
  bool orientation_augment = false;  // sample closed-tour orientation per epoch
  int embed_dim = 64;
  int ff_dim = 128;
  int heads = 4;
  int layers = 3;
  bool append_ident = false;     // extra random-identifier input channel
  bool conv_row_minmax = true;   // ATSP edge-weight normalization scope
  int eval_limit = 200;       // held-out instances scored per epoch
  std::string metrics_path;   // JSON-lines log; empty disables
};

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;
  double heldout_gap = 0.0;  // NaN when no held-out set
  double wall_seconds = 0.0;
};

// Imitation training: each epoch draws one sub-path per stored solution, all
// items of a minibatch share the sub-path length n, gradients reduce over a
// fixed chunk order so results do not depend on the worker count.
PolicyModel train(const Dataset& data, const Dataset* heldout, const TrainConfig& cfg,
                  std::vector<EpochMetrics>* metrics = nullptr, std::ostream* log = nullptr);

// Mean signed optimality gap of greedy rollouts against the stored
// references, over at most `limit` items (0 = all).
double mean_greedy_gap(const PolicyModel& model, const Dataset& data, int limit = 0,
                       int workers = 0);

// (value - ref)/ref for minimization problems, (ref - value)/ref for
// maximization (OP/KP), both on the reported positive metric; negative means
// better than the reference.
double optimality_gap(Problem problem, double objective, double ref_objective);

}  // namespace bqmdp
