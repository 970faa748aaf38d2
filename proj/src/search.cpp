#include "bqmdp/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bqmdp {

namespace {

// Lowest action index wins ties.
int argmax_action(const std::vector<double>& log_probs) {
  int best = -1;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < log_probs.size(); ++a)
    if (log_probs[a] > best_v) {
      best_v = log_probs[a];
      best = static_cast<int>(a);
    }
  return best;
}

}  // namespace

ProblemInstance knn_restrict(const ProblemInstance& inst, int k) {
  if (inst.problem == Problem::Kp) return inst;
  if (k <= 0 || k >= static_cast<int>(inst.active.size())) return inst;
  std::vector<int> nearest = inst.active;
  std::stable_sort(nearest.begin(), nearest.end(), [&](int a, int b) {
    return inst.data->dist(inst.origin, a) < inst.data->dist(inst.origin, b);
  });
  nearest.resize(k);
  std::sort(nearest.begin(), nearest.end());
  ProblemInstance view = inst;
  view.active = std::move(nearest);
  return view;
}

RolloutResult greedy_rollout(const ScoreFn& score_fn, const ProblemInstance& inst,
                             const SearchOptions& opts) {
  ProblemInstance state = inst;
  PartialSolution partial = PartialSolution::empty(inst.monoid_kind());
  double log_prob = 0.0;
  const int out = inst.problem == Problem::PathCvrp ? 2 : 1;
  while (true) {
    const ProblemInstance view = knn_restrict(state, opts.knn);
    if (allowed_steps(view).empty()) break;  // auto-neutral
    const std::vector<double> scores = score_fn(view);
    const int action = argmax_action(scores);
    const Step z = action_step(view, action / out, action % out);
    log_prob += scores[action];
    partial.push(z);
    state = reduce(state, z).next;
  }
  const double obj = objective(inst, partial);
  return {std::move(partial), obj, log_prob};
}

RolloutResult greedy_rollout(const PolicyModel& model, const ProblemInstance& inst,
                             const SearchOptions& opts) {
  return greedy_rollout(
      [&model](const ProblemInstance& s) { return policy_scores(model, s); }, inst, opts);
}

RolloutResult beam_search(const ScoreFn& score_fn, const ProblemInstance& inst, int width,
                          const SearchOptions& opts) {
  if (width < 1) throw Error(ErrorCategory::InvalidConfig, "beam_search: width must be >= 1");
  struct Beam {
    ProblemInstance state;
    PartialSolution partial;
    double log_prob = 0.0;
  };
  std::vector<Beam> frontier{{inst, PartialSolution::empty(inst.monoid_kind()), 0.0}};
  bool have_result = false;
  RolloutResult best;
  const int out = inst.problem == Problem::PathCvrp ? 2 : 1;

  auto complete = [&](Beam& b) {
    const double obj = objective(inst, b.partial);
    const bool better = opts.select_by_logprob ? b.log_prob > best.log_prob : obj < best.objective;
    if (!have_result || better) {
      have_result = true;
      best = {std::move(b.partial), obj, b.log_prob};
    }
  };

  while (!frontier.empty()) {
    struct Candidate {
      double log_prob;
      int parent;
      int action;
    };
    std::vector<Candidate> candidates;
    for (std::size_t b = 0; b < frontier.size(); ++b) {
      const ProblemInstance view = knn_restrict(frontier[b].state, opts.knn);
      if (allowed_steps(view).empty()) {
        complete(frontier[b]);
        continue;
      }
      const std::vector<double> scores = score_fn(view);
      for (std::size_t a = 0; a < scores.size(); ++a)
        if (scores[a] > -std::numeric_limits<double>::infinity())
          candidates.push_back(
              {frontier[b].log_prob + scores[a], static_cast<int>(b), static_cast<int>(a)});
    }
    if (candidates.empty()) break;
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
      if (x.log_prob != y.log_prob) return x.log_prob > y.log_prob;
      if (x.parent != y.parent) return x.parent < y.parent;
      return x.action < y.action;
    });
    if (static_cast<int>(candidates.size()) > width) candidates.resize(width);

    std::vector<Beam> next;
    next.reserve(candidates.size());
    for (const Candidate& c : candidates) {
      const Beam& parent = frontier[c.parent];
      const ProblemInstance view = knn_restrict(parent.state, opts.knn);
      const Step z = action_step(view, c.action / out, c.action % out);
      Beam grown{reduce(parent.state, z).next, parent.partial, c.log_prob};
      grown.partial.push(z);
      next.push_back(std::move(grown));
    }
    frontier = std::move(next);
  }
  if (!have_result)
    throw Error(ErrorCategory::DeadEnd, "beam_search: no completed trajectory");
  return best;
}

RolloutResult beam_search(const PolicyModel& model, const ProblemInstance& inst, int width,
                          const SearchOptions& opts) {
  return beam_search([&model](const ProblemInstance& s) { return policy_scores(model, s); },
                     inst, width, opts);
}

}  // namespace bqmdp
