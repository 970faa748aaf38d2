#include "bqmdp/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace bqmdp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Min-cost path origin -> (all of nodes) -> dest; returns visiting order.
PathSolution hk_over(const InstanceData& d, const std::vector<int>& nodes, int origin,
                     int dest) {
  const int m = static_cast<int>(nodes.size());
  if (m == 0) return {{}, d.dist(origin, dest)};
  if (m == 1) return {{nodes[0]}, d.dist(origin, nodes[0]) + d.dist(nodes[0], dest)};
  const std::size_t full = std::size_t{1} << m;
  std::vector<double> dp(full * m, kInf);
  std::vector<std::int8_t> parent(full * m, -1);
  for (int j = 0; j < m; ++j) dp[(std::size_t{1} << j) * m + j] = d.dist(origin, nodes[j]);
  for (std::size_t mask = 1; mask < full; ++mask) {
    for (int j = 0; j < m; ++j) {
      if (!(mask & (std::size_t{1} << j))) continue;
      const double base = dp[mask * m + j];
      if (base == kInf) continue;
      for (int k = 0; k < m; ++k) {
        if (mask & (std::size_t{1} << k)) continue;
        const std::size_t next = mask | (std::size_t{1} << k);
        const double cand = base + d.dist(nodes[j], nodes[k]);
        if (cand < dp[next * m + k]) {
          dp[next * m + k] = cand;
          parent[next * m + k] = static_cast<std::int8_t>(j);
        }
      }
    }
  }
  double best = kInf;
  int best_last = -1;
  for (int j = 0; j < m; ++j) {
    const double cand = dp[(full - 1) * m + j] + d.dist(nodes[j], dest);
    if (cand < best) {
      best = cand;
      best_last = j;
    }
  }
  std::vector<int> order(m);
  std::size_t mask = full - 1;
  int j = best_last;
  for (int pos = m - 1; pos >= 0; --pos) {
    order[pos] = nodes[j];
    const int prev = parent[mask * m + j];
    mask &= ~(std::size_t{1} << j);
    j = prev;
  }
  return {std::move(order), best};
}

}  // namespace

PathSolution held_karp_path(const ProblemInstance& inst) {
  if (inst.problem != Problem::PathTsp && inst.problem != Problem::PathAtsp)
    throw Error(ErrorCategory::InvalidConfig, "held_karp_path: routing instance required");
  if (inst.active.size() > 22)
    throw Error(ErrorCategory::SizeLimit, "held_karp_path: more than 22 active nodes");
  if (inst.active.empty()) return {{}, 0.0};  // objective() normalizes f(empty) to 0
  return hk_over(*inst.data, inst.active, inst.origin, inst.destination);
}

KpSolution kp_exact(const ProblemInstance& inst) {
  if (inst.problem != Problem::Kp)
    throw Error(ErrorCategory::InvalidConfig, "kp_exact: knapsack instance required");
  const InstanceData& d = *inst.data;
  const int m = static_cast<int>(inst.active.size());

  // Items by value density, the classic branch order.
  std::vector<int> order = inst.active;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return d.value[a] * d.weight[b] > d.value[b] * d.weight[a];
  });

  std::vector<int> best_set, cur;
  double best = 0.0;
  // DFS; prune only when even the fractional bound cannot beat the incumbent
  // by a safe margin, so float noise in the bound can never cut the optimum.
  auto rec = [&](auto&& self, int idx, double cap, double value) -> void {
    if (value > best) {
      best = value;
      best_set = cur;
    }
    if (idx == m) return;
    double bound = value, room = cap;
    for (int i = idx; i < m; ++i) {
      const int item = order[i];
      if (d.weight[item] <= room) {
        room -= d.weight[item];
        bound += d.value[item];
      } else {
        bound += d.value[item] * (room / d.weight[item]);
        break;
      }
    }
    if (bound < best - 1e-9) return;
    const int item = order[idx];
    if (d.weight[item] <= cap) {
      cur.push_back(item);
      self(self, idx + 1, cap - d.weight[item], value + d.value[item]);
      cur.pop_back();
    }
    self(self, idx + 1, cap, value);
  };
  rec(rec, 0, inst.capacity, 0.0);

  std::sort(best_set.begin(), best_set.end());
  // Re-sum in index order so the reported value is independent of the
  // branching order.
  double value = 0.0;
  for (int item : best_set) value += d.value[item];
  return {std::move(best_set), value};
}

CvrpSolution cvrp_exact(const ProblemInstance& inst) {
  if (inst.problem != Problem::PathCvrp)
    throw Error(ErrorCategory::InvalidConfig, "cvrp_exact: cvrp instance required");
  const int m = static_cast<int>(inst.active.size());
  if (m > 10) throw Error(ErrorCategory::SizeLimit, "cvrp_exact: more than 10 customers");
  const InstanceData& d = *inst.data;
  const int depot = inst.destination;
  const std::size_t full = std::size_t{1} << m;

  std::vector<double> subset_demand(full, 0.0);
  for (std::size_t s = 1; s < full; ++s) {
    const int low = std::countr_zero(s);
    subset_demand[s] = subset_demand[s & (s - 1)] + d.demand[inst.active[low]];
  }
  auto members = [&](std::size_t s) {
    std::vector<int> nodes;
    for (int i = 0; i < m; ++i)
      if (s & (std::size_t{1} << i)) nodes.push_back(inst.active[i]);
    return nodes;
  };

  // Cheapest depot-rooted tour per feasible subset.
  std::vector<double> tour_cost(full, kInf);
  std::vector<std::vector<int>> tour_order(full);
  tour_cost[0] = 0.0;
  for (std::size_t s = 1; s < full; ++s) {
    if (subset_demand[s] > inst.full_capacity) continue;
    PathSolution t = hk_over(d, members(s), depot, depot);
    tour_cost[s] = t.cost;
    tour_order[s] = std::move(t.order);
  }

  // g[t]: cheapest cover of customer set t by depot-rooted subtours.
  std::vector<double> g(full, kInf);
  std::vector<std::size_t> g_pick(full, 0);
  g[0] = 0.0;
  for (std::size_t t = 1; t < full; ++t) {
    // Fix the lowest customer into the first subtour to avoid counting
    // subtour orderings.
    const std::size_t low = t & (~t + 1);
    for (std::size_t s = t; s; s = (s - 1) & t) {
      if (!(s & low)) continue;
      if (tour_cost[s] == kInf || g[t & ~s] == kInf) continue;
      const double cand = tour_cost[s] + g[t & ~s];
      if (cand < g[t]) {
        g[t] = cand;
        g_pick[t] = s;
      }
      if (s == low) break;
    }
  }

  // Origin leg: a (possibly empty) first subtour limited by the remaining
  // capacity, ending at the depot.
  double best = kInf;
  std::size_t best_first = 0;
  std::vector<std::vector<int>> first_order(full);
  for (std::size_t s = 0; s < full; ++s) {
    if (subset_demand[s] > inst.capacity) continue;
    if (g[full - 1 - s] == kInf) continue;
    PathSolution leg = hk_over(d, members(s), inst.origin, depot);
    const double cand = leg.cost + g[full - 1 - s];
    if (cand < best) {
      best = cand;
      best_first = s;
      first_order[s] = std::move(leg.order);
    }
  }
  if (best == kInf)
    throw Error(ErrorCategory::InfeasibleSolution, "cvrp_exact: no feasible cover");

  CvrpSolution sol;
  sol.cost = best;
  sol.first_from_origin = best_first != 0;
  if (best_first) sol.subtours.push_back(first_order[best_first]);
  std::size_t rest = (full - 1) & ~best_first;
  while (rest) {
    const std::size_t s = g_pick[rest];
    sol.subtours.push_back(tour_order[s]);
    rest &= ~s;
  }
  return sol;
}

OpSolution op_exact(const ProblemInstance& inst) {
  if (inst.problem != Problem::PathOp)
    throw Error(ErrorCategory::InvalidConfig, "op_exact: op instance required");
  const int m = static_cast<int>(inst.active.size());
  if (m > 10) throw Error(ErrorCategory::SizeLimit, "op_exact: more than 10 nodes");
  const InstanceData& d = *inst.data;
  const std::size_t full = std::size_t{1} << m;

  // Scan subsets by prize descending; the first one whose cheapest route
  // fits the budget is optimal. Ties go to the smaller bitmask.
  std::vector<std::pair<double, std::size_t>> ranked(full);
  for (std::size_t s = 0; s < full; ++s) {
    double prize = 0.0;
    for (int i = 0; i < m; ++i)
      if (s & (std::size_t{1} << i)) prize += d.prize[inst.active[i]];
    ranked[s] = {prize, s};
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });

  for (const auto& [prize, s] : ranked) {
    std::vector<int> nodes;
    for (int i = 0; i < m; ++i)
      if (s & (std::size_t{1} << i)) nodes.push_back(inst.active[i]);
    PathSolution route = hk_over(d, nodes, inst.origin, inst.destination);
    if (route.cost <= inst.capacity) return {std::move(route.order), prize};
  }
  return {};
}

PartialSolution cvrp_steps(const CvrpSolution& sol) {
  PartialSolution partial(MonoidKind::Sequence);
  for (std::size_t t = 0; t < sol.subtours.size(); ++t) {
    const bool via_first = t > 0 || !sol.first_from_origin;
    for (std::size_t i = 0; i < sol.subtours[t].size(); ++i)
      partial.push(Step{sol.subtours[t][i], via_first && i == 0});
  }
  return partial;
}

ExactSolution solve_exact(const ProblemInstance& inst) {
  switch (inst.problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp: {
      PathSolution s = held_karp_path(inst);
      PartialSolution partial(MonoidKind::Sequence);
      for (int node : s.order) partial.push(Step{node, false});
      return {std::move(partial), s.cost};
    }
    case Problem::PathCvrp: {
      CvrpSolution s = cvrp_exact(inst);
      return {cvrp_steps(s), s.cost};
    }
    case Problem::PathOp: {
      OpSolution s = op_exact(inst);
      PartialSolution partial(MonoidKind::Sequence);
      for (int node : s.order) partial.push(Step{node, false});
      return {std::move(partial), -s.prize};
    }
    case Problem::Kp: {
      KpSolution s = kp_exact(inst);
      std::vector<Step> steps;
      for (int item : s.picked) steps.push_back(Step{item, false});
      return {PartialSolution(MonoidKind::ItemSet, std::move(steps)), -s.value};
    }
  }
  throw Error(ErrorCategory::InvalidConfig, "solve_exact: bad problem");
}

}  // namespace bqmdp
