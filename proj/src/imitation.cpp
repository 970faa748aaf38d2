#include "bqmdp/imitation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>

#include "bqmdp/search.hpp"
#include "json.hpp"

namespace bqmdp {

namespace {

int worker_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, count) over a fixed worker pool.
void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<Step> solution_to_trajectory(const ProblemInstance& inst,
                                         const PartialSolution& solution,
                                         bool reverse_tour) {
  if (!partial_feasible(inst, solution))
    throw Error(ErrorCategory::InfeasibleSolution,
                "solution_to_trajectory: stored solution is infeasible");
  switch (inst.problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp: {
      std::vector<Step> steps = solution.steps();
      if (reverse_tour) {
        // Valid expert order only for a closed symmetric tour.
        std::reverse(steps.begin(), steps.end());
      }
      return steps;
    }
    case Problem::PathOp:
      return solution.steps();
    case Problem::Kp:
      return solution.steps();  // canonical item order; any order is expert-valid
    case Problem::PathCvrp: {
      // Split into subtours, then emit them sorted by the vehicle capacity
      // left at the end of each subtour, smallest first.
      struct Subtour {
        std::vector<int> nodes;
        double end_capacity = 0.0;
      };
      std::vector<Subtour> tours;
      double cap = inst.capacity;
      for (const Step& z : solution.steps()) {
        if (z.via_depot || tours.empty()) {
          tours.push_back({});
          if (z.via_depot) cap = inst.full_capacity;
        }
        cap -= inst.data->demand[z.node];
        tours.back().nodes.push_back(z.node);
        tours.back().end_capacity = cap;
      }
      std::stable_sort(tours.begin(), tours.end(), [](const Subtour& a, const Subtour& b) {
        if (a.end_capacity != b.end_capacity) return a.end_capacity < b.end_capacity;
        return a.nodes.front() < b.nodes.front();
      });
      std::vector<Step> steps;
      for (std::size_t t = 0; t < tours.size(); ++t)
        for (std::size_t i = 0; i < tours[t].nodes.size(); ++i)
          steps.push_back(Step{tours[t].nodes[i], t > 0 && i == 0});
      // Reordering is only safe when every subtour fits the initial capacity
      // (always true for a full-capacity start).
      if (!partial_extendable(inst, PartialSolution(MonoidKind::Sequence, steps)))
        throw Error(ErrorCategory::InfeasibleSolution,
                    "solution_to_trajectory: subtour reorder breaks the initial capacity");
      return steps;
    }
  }
  throw Error(ErrorCategory::InvalidConfig, "solution_to_trajectory: bad problem");
}

TrainingSample sample_subinstance(const ProblemInstance& inst,
                                  const std::vector<Step>& trajectory, int n, Rng& rng) {
  const int m = static_cast<int>(trajectory.size());
  if (m < 1)
    throw Error(ErrorCategory::TrajectoryTooShort, "sample_subinstance: empty trajectory");
  if (n < 1) throw Error(ErrorCategory::InvalidConfig, "sample_subinstance: n must be >= 1");
  const int n_eff = std::min(n, m);

  if (inst.problem == Problem::Kp) {
    // Position with n decisions left; the remaining expert items are all
    // valid targets, the other unpicked items stay as distractors.
    const int p = std::max(0, m - n_eff);
    ProblemInstance state = inst;
    for (int i = 0; i < p; ++i) state = reduce(state, trajectory[i]).next;
    return {std::move(state),
            std::vector<Step>(trajectory.begin() + p, trajectory.end())};
  }

  const int p = static_cast<int>(rng.next_int(0, m - n_eff));
  ProblemInstance state = inst;
  for (int i = 0; i < p; ++i) state = reduce(state, trajectory[i]).next;

  std::vector<int> window(static_cast<std::size_t>(n_eff));
  for (int i = 0; i < n_eff; ++i) window[i] = trajectory[p + i].node;

  switch (inst.problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp: {
      // The sub-path solves the path-TSP between its endpoints: the node
      // after the window becomes the destination.
      const int dest = p + n_eff < m ? trajectory[p + n_eff].node : inst.destination;
      ProblemInstance sub = state.problem == Problem::PathTsp
                                ? make_path_tsp(state.data, window, state.origin, dest)
                                : make_path_atsp(state.data, window, state.origin, dest);
      return {std::move(sub), {trajectory[p]}};
    }
    case Problem::PathCvrp: {
      ProblemInstance sub = make_path_cvrp(state.data, window, state.destination,
                                           state.origin, state.capacity, state.full_capacity);
      return {std::move(sub), {trajectory[p]}};
    }
    case Problem::PathOp: {
      ProblemInstance sub = make_path_op(state.data, window, state.origin,
                                         state.destination, state.capacity);
      return {std::move(sub), {trajectory[p]}};
    }
    default:
      throw Error(ErrorCategory::InvalidConfig, "sample_subinstance: bad problem");
  }
}

ActionTarget make_target(const ProblemInstance& state, const std::vector<Step>& targets) {
  const std::vector<int> tokens = token_nodes(state);
  const int out = state.problem == Problem::PathCvrp ? 2 : 1;
  std::vector<int> ids;
  for (const Step& z : targets) {
    const auto it = std::find(tokens.begin(), tokens.end(), z.node);
    if (it == tokens.end())
      throw Error(ErrorCategory::IllegalAction, "make_target: target node not in state");
    ids.push_back(static_cast<int>(it - tokens.begin()) * out + (z.via_depot ? 1 : 0));
  }
  return ActionTarget::uniform(std::move(ids));
}

double optimality_gap(Problem problem, double objective, double ref_objective) {
  const bool maximization = problem == Problem::PathOp || problem == Problem::Kp;
  if (maximization) {
    const double value = -objective, ref = -ref_objective;
    return (ref - value) / ref;
  }
  return (objective - ref_objective) / ref_objective;
}

double mean_greedy_gap(const PolicyModel& model, const Dataset& data, int limit,
                       int workers) {
  const int count = limit > 0 ? std::min<int>(limit, data.items.size())
                              : static_cast<int>(data.items.size());
  if (count == 0) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> gaps(count, 0.0);
  parallel_for(count, worker_count(workers), [&](int i) {
    const TrainingExample& ex = data.items[i];
    const RolloutResult r = greedy_rollout(model, ex.instance);
    gaps[i] = optimality_gap(data.problem, r.objective, ex.ref_objective);
  });
  double sum = 0.0;
  for (double gap : gaps) sum += gap;
  return sum / count;
}

PolicyModel train(const Dataset& data, const Dataset* heldout, const TrainConfig& cfg,
                  std::vector<EpochMetrics>* metrics, std::ostream* log) {
  if (data.items.empty())
    throw Error(ErrorCategory::InvalidConfig, "train: empty dataset");
  if (cfg.epochs < 1 || cfg.batch_size < 1 || cfg.lr <= 0.0)
    throw Error(ErrorCategory::InvalidConfig, "train: bad epochs/batch size/learning rate");

  const int workers = worker_count(cfg.workers);
  PolicyConfig pcfg = PolicyConfig::for_problem(data.problem, cfg.embed_dim, cfg.ff_dim,
                                                cfg.heads, cfg.layers,
                                                data.items[0].instance.data->ident_dim,
                                                cfg.append_ident);
  pcfg.conv_row_minmax = cfg.conv_row_minmax;
  PolicyModel model(pcfg);
  model.init_weights(derive_seed(cfg.seed, 0x1717));

  // Expert trajectories once up front; orientation augmentation flips closed
  // tours at sampling time. Items with an empty expert solution (a budget too
  // tight to visit anything) carry no supervision and are skipped.
  std::vector<std::vector<Step>> trajectories(data.items.size());
  parallel_for(static_cast<int>(data.items.size()), workers, [&](int i) {
    trajectories[i] = solution_to_trajectory(data.items[i].instance, data.items[i].solution);
  });
  int max_decisions = 1;
  for (const auto& t : trajectories) max_decisions = std::max<int>(max_decisions, t.size());
  const bool can_reverse = cfg.orientation_augment && data.problem == Problem::PathTsp;

  AdamState adam;
  std::vector<int> order;
  for (std::size_t i = 0; i < data.items.size(); ++i)
    if (!trajectories[i].empty()) order.push_back(static_cast<int>(i));
  if (order.empty())
    throw Error(ErrorCategory::InvalidConfig, "train: every stored solution is empty");

  std::ofstream metrics_file;
  if (!cfg.metrics_path.empty()) {
    metrics_file.open(cfg.metrics_path);
    if (!metrics_file)
      throw Error(ErrorCategory::Io, "train: cannot write " + cfg.metrics_path);
  }

  const int param_count = model.param_count();
  constexpr int kChunk = 16;  // fixed chunking keeps sums independent of the worker count

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng shuffle_rng(derive_seed(cfg.seed, 0xE0000 + epoch));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.next_int(0, static_cast<std::int64_t>(i) - 1)]);

    const double lr = lr_schedule(cfg.lr, epoch);
    double loss_sum = 0.0;
    long loss_count = 0;

    for (std::size_t batch_start = 0; batch_start < order.size();
         batch_start += cfg.batch_size) {
      const int batch_n = static_cast<int>(
          std::min<std::size_t>(cfg.batch_size, order.size() - batch_start));
      // One shared sub-path length per minibatch, counted in path nodes
      // (origin + customers + destination), so the 4-node floor means two
      // remaining decisions.
      Rng batch_rng(derive_seed(cfg.seed, 0xB0000000ULL + epoch * 1000003ULL + batch_start));
      const int upper = std::max(cfg.min_subpath, max_decisions + 2);
      const int shared_nodes = static_cast<int>(batch_rng.next_int(cfg.min_subpath, upper));
      const int shared_n = std::max(1, shared_nodes - 2);

      const int chunks = (batch_n + kChunk - 1) / kChunk;
      std::vector<std::vector<double>> chunk_grads(chunks);
      std::vector<double> chunk_loss(chunks, 0.0);
      parallel_for(chunks, workers, [&](int c) {
        chunk_grads[c].assign(param_count, 0.0);
        for (int i = c * kChunk; i < std::min(batch_n, (c + 1) * kChunk); ++i) {
          const int idx = order[batch_start + i];
          Rng item_rng(derive_seed(cfg.seed, 0x5A000000ULL + epoch * 75000017ULL +
                                                 (batch_start + i)));
          std::vector<Step> traj = trajectories[idx];
          if (can_reverse && item_rng.next_int(0, 1) == 1)
            std::reverse(traj.begin(), traj.end());
          const TrainingSample sample =
              sample_subinstance(data.items[idx].instance, traj, shared_n, item_rng);
          const ActionTarget target = make_target(sample.state, sample.targets);
          ForwardTape tape;
          const std::vector<double> log_probs = policy_scores(model, sample.state, &tape);
          chunk_loss[c] += cross_entropy(log_probs, target);
          policy_backward(model, tape, target, chunk_grads[c]);
        }
      });

      std::vector<double> grad(param_count, 0.0);
      for (int c = 0; c < chunks; ++c) {
        loss_sum += chunk_loss[c];
        for (int i = 0; i < param_count; ++i) grad[i] += chunk_grads[c][i];
      }
      loss_count += batch_n;
      const double inv = 1.0 / batch_n;
      for (double& gv : grad) gv *= inv;
      adam_step(model, grad, adam, lr);
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.loss = loss_sum / static_cast<double>(loss_count);
    em.heldout_gap = heldout ? mean_greedy_gap(model, *heldout, cfg.eval_limit, workers)
                             : std::numeric_limits<double>::quiet_NaN();
    em.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (metrics) metrics->push_back(em);
    if (metrics_file) {
      nlohmann::json j{{"epoch", em.epoch},
                       {"loss", em.loss},
                       {"wall_seconds", em.wall_seconds}};
      if (!std::isnan(em.heldout_gap)) j["heldout_gap"] = em.heldout_gap;
      metrics_file << j.dump() << "\n";
    }
    if (log) {
      (*log) << "epoch " << em.epoch << " loss " << em.loss;
      if (!std::isnan(em.heldout_gap)) (*log) << " heldout_gap " << em.heldout_gap;
      (*log) << " wall " << em.wall_seconds << "s\n";
      log->flush();
    }
  }
  return model;
}

}  // namespace bqmdp
