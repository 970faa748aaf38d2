#include "bqmdp/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

namespace bqmdp {

const char* problem_name(Problem p) {
  switch (p) {
    case Problem::PathTsp: return "tsp";
    case Problem::PathAtsp: return "atsp";
    case Problem::PathCvrp: return "cvrp";
    case Problem::PathOp: return "op";
    case Problem::Kp: return "kp";
  }
  return "?";
}

Problem problem_from_name(const std::string& name) {
  if (name == "tsp") return Problem::PathTsp;
  if (name == "atsp") return Problem::PathAtsp;
  if (name == "cvrp") return Problem::PathCvrp;
  if (name == "op") return Problem::PathOp;
  if (name == "kp") return Problem::Kp;
  throw Error(ErrorCategory::InvalidConfig, "unknown problem: " + name);
}

int InstanceData::node_count() const {
  if (!weight.empty()) return static_cast<int>(weight.size());
  if (!xs.empty()) return static_cast<int>(xs.size());
  if (!cost.empty()) return static_cast<int>(std::lround(std::sqrt(double(cost.size()))));
  return 0;
}

double InstanceData::dist(int i, int j) const {
  if (!cost.empty()) return cost[static_cast<std::size_t>(i) * node_count() + j];
  const double dx = xs[i] - xs[j];
  const double dy = ys[i] - ys[j];
  return std::sqrt(dx * dx + dy * dy);
}

namespace {

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

bool in_active(const ProblemInstance& inst, int node) {
  return std::binary_search(inst.active.begin(), inst.active.end(), node);
}

void erase_active(std::vector<int>& active, int node) {
  active.erase(std::lower_bound(active.begin(), active.end(), node));
}

}  // namespace

ProblemInstance make_path_tsp(std::shared_ptr<const InstanceData> data,
                              std::vector<int> active, int origin, int destination) {
  return ProblemInstance{Problem::PathTsp, std::move(data), sorted(std::move(active)),
                         origin, destination, 0.0, 0.0};
}

ProblemInstance make_path_atsp(std::shared_ptr<const InstanceData> data,
                               std::vector<int> active, int origin, int destination) {
  return ProblemInstance{Problem::PathAtsp, std::move(data), sorted(std::move(active)),
                         origin, destination, 0.0, 0.0};
}

ProblemInstance make_path_cvrp(std::shared_ptr<const InstanceData> data,
                               std::vector<int> active, int depot, int origin,
                               double remaining_capacity, double full_capacity) {
  if (remaining_capacity < 0 || remaining_capacity > full_capacity)
    throw Error(ErrorCategory::InvalidConfig, "path-cvrp: need 0 <= c <= C");
  for (int q : active)
    if (data->demand[q] > full_capacity)
      throw Error(ErrorCategory::InvalidConfig,
                  "path-cvrp: customer demand exceeds the vehicle capacity");
  return ProblemInstance{Problem::PathCvrp, std::move(data), sorted(std::move(active)),
                         origin, depot, remaining_capacity, full_capacity};
}

ProblemInstance make_path_op(std::shared_ptr<const InstanceData> data,
                             std::vector<int> active, int origin, int depot,
                             double remaining_budget) {
  return ProblemInstance{Problem::PathOp, std::move(data), sorted(std::move(active)),
                         origin, depot, remaining_budget, 0.0};
}

ProblemInstance make_kp(std::shared_ptr<const InstanceData> data,
                        std::vector<int> active, double remaining_capacity) {
  return ProblemInstance{Problem::Kp, std::move(data), sorted(std::move(active)),
                         -1, -1, remaining_capacity, remaining_capacity};
}

std::vector<int> flatten_walk(const ProblemInstance& inst, const PartialSolution& partial) {
  if (inst.problem == Problem::Kp)
    throw Error(ErrorCategory::InvalidConfig, "flatten_walk: knapsack has no walk");
  std::vector<int> walk{inst.origin};
  for (const Step& z : partial.steps()) {
    if (z.via_depot) walk.push_back(inst.destination);
    walk.push_back(z.node);
  }
  const bool covered = partial.size() == inst.active.size();
  if (inst.problem == Problem::PathOp || covered) walk.push_back(inst.destination);
  return walk;
}

double objective(const ProblemInstance& inst, const PartialSolution& partial) {
  const InstanceData& d = *inst.data;
  switch (inst.problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp: {
      double len = 0.0;
      int pos = inst.origin;
      for (const Step& z : partial.steps()) {
        len += d.dist(pos, z.node);
        pos = z.node;
      }
      if (!inst.active.empty() && partial.size() == inst.active.size())
        len += d.dist(pos, inst.destination);
      return len;
    }
    case Problem::PathCvrp: {
      double len = 0.0;
      int pos = inst.origin;
      for (const Step& z : partial.steps()) {
        if (z.via_depot) {
          len += d.dist(pos, inst.destination) + d.dist(inst.destination, z.node);
        } else {
          len += d.dist(pos, z.node);
        }
        pos = z.node;
      }
      if (!inst.active.empty() && partial.size() == inst.active.size())
        len += d.dist(pos, inst.destination);
      return len;
    }
    case Problem::PathOp: {
      double total = 0.0;
      for (const Step& z : partial.steps()) total += d.prize[z.node];
      return -total;
    }
    case Problem::Kp: {
      double total = 0.0;
      for (const Step& z : partial.steps()) total += d.value[z.node];
      return -total;
    }
  }
  return 0.0;
}

bool partial_extendable(const ProblemInstance& inst, const PartialSolution& partial) {
  const InstanceData& d = *inst.data;
  std::unordered_set<int> seen;
  for (const Step& z : partial.steps()) {
    if (!in_active(inst, z.node)) return false;
    if (!seen.insert(z.node).second) return false;
  }
  switch (inst.problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp:
      return true;
    case Problem::PathCvrp: {
      // Same fold as reduce(), so the check is bit-for-bit the mask's.
      double c = inst.capacity;
      for (const Step& z : partial.steps()) {
        const double load = d.demand[z.node];
        if (z.via_depot) {
          if (!(load <= inst.full_capacity)) return false;
          c = inst.full_capacity - load;
        } else {
          if (!(load <= c)) return false;
          c = c - load;
        }
      }
      return true;
    }
    case Problem::PathOp: {
      double budget = inst.capacity;
      int pos = inst.origin;
      for (const Step& z : partial.steps()) {
        if (!(d.dist(pos, z.node) + d.dist(z.node, inst.destination) <= budget)) return false;
        budget = budget - d.dist(pos, z.node);
        pos = z.node;
      }
      return true;
    }
    case Problem::Kp: {
      double c = inst.capacity;
      for (const Step& z : partial.steps()) {
        if (!(d.weight[z.node] <= c)) return false;
        c = c - d.weight[z.node];
      }
      return true;
    }
  }
  return false;
}

bool partial_feasible(const ProblemInstance& inst, const PartialSolution& partial) {
  if (!partial_extendable(inst, partial)) return false;
  switch (inst.problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp:
    case Problem::PathCvrp:
      return partial.size() == inst.active.size();
    case Problem::PathOp:
    case Problem::Kp:
      return true;
  }
  return false;
}

bool is_complete(const ProblemInstance& inst) {
  switch (inst.problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp:
    case Problem::PathCvrp:
      return inst.active.empty();
    case Problem::PathOp:
      return inst.data->dist(inst.origin, inst.destination) <= inst.capacity;
    case Problem::Kp:
      return true;
  }
  return false;
}

std::vector<Step> allowed_steps(const ProblemInstance& inst) {
  const InstanceData& d = *inst.data;
  std::vector<Step> out;
  switch (inst.problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp:
      for (int q : inst.active) out.push_back({q, false});
      break;
    case Problem::PathCvrp:
      for (int q : inst.active) {
        const double load = d.demand[q];
        if (load <= inst.capacity) out.push_back({q, false});
        if (load <= inst.full_capacity) out.push_back({q, true});
      }
      break;
    case Problem::PathOp:
      for (int q : inst.active) {
        if (d.dist(inst.origin, q) + d.dist(q, inst.destination) <= inst.capacity)
          out.push_back({q, false});
      }
      break;
    case Problem::Kp:
      for (int q : inst.active) {
        if (d.weight[q] <= inst.capacity) out.push_back({q, false});
      }
      break;
  }
  return out;
}

bool step_allowed(const ProblemInstance& inst, Step z) {
  const InstanceData& d = *inst.data;
  if (!in_active(inst, z.node)) return false;
  switch (inst.problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp:
      return !z.via_depot;
    case Problem::PathCvrp:
      return d.demand[z.node] <= (z.via_depot ? inst.full_capacity : inst.capacity);
    case Problem::PathOp:
      return !z.via_depot &&
             d.dist(inst.origin, z.node) + d.dist(z.node, inst.destination) <= inst.capacity;
    case Problem::Kp:
      return !z.via_depot && d.weight[z.node] <= inst.capacity;
  }
  return false;
}

ReduceResult reduce(const ProblemInstance& inst, Step z) {
  if (!step_allowed(inst, z))
    throw Error(ErrorCategory::IllegalAction,
                std::string("reduce: step not allowed (node ") + std::to_string(z.node) +
                    (z.via_depot ? ", via depot)" : ")"));
  const InstanceData& d = *inst.data;
  ReduceResult r{inst, 0.0};
  erase_active(r.next.active, z.node);
  const bool last = r.next.active.empty();
  switch (inst.problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp: {
      double travelled = d.dist(inst.origin, z.node);
      if (last) travelled += d.dist(z.node, inst.destination);
      r.next.origin = z.node;
      r.reward = -travelled;
      break;
    }
    case Problem::PathCvrp: {
      double travelled;
      if (z.via_depot) {
        travelled = d.dist(inst.origin, inst.destination) + d.dist(inst.destination, z.node);
        r.next.capacity = inst.full_capacity - d.demand[z.node];
      } else {
        travelled = d.dist(inst.origin, z.node);
        r.next.capacity = inst.capacity - d.demand[z.node];
      }
      if (last) travelled += d.dist(z.node, inst.destination);
      r.next.origin = z.node;
      r.reward = -travelled;
      break;
    }
    case Problem::PathOp: {
      r.next.capacity = inst.capacity - d.dist(inst.origin, z.node);
      r.next.origin = z.node;
      r.reward = d.prize[z.node];
      break;
    }
    case Problem::Kp: {
      r.next.capacity = inst.capacity - d.weight[z.node];
      // items that no longer fit drop out of the reduced instance
      std::erase_if(r.next.active,
                    [&](int q) { return d.weight[q] > r.next.capacity; });
      r.reward = d.value[z.node];
      break;
    }
  }
  return r;
}

ProblemInstance phi(const ProblemInstance& inst, const PartialSolution& partial) {
  ProblemInstance state = inst;
  for (const Step& z : partial.steps()) state = reduce(state, z).next;
  return state;
}

std::vector<int> token_nodes(const ProblemInstance& inst) {
  if (inst.problem == Problem::Kp) return inst.active;
  std::vector<int> tokens{inst.origin, inst.destination};
  tokens.insert(tokens.end(), inst.active.begin(), inst.active.end());
  return tokens;
}

Step action_step(const ProblemInstance& inst, int token, int column) {
  const std::vector<int> tokens = token_nodes(inst);
  if (token < 0 || token >= static_cast<int>(tokens.size()))
    throw Error(ErrorCategory::IllegalAction, "action_step: token out of range");
  return Step{tokens[token], column == 1};
}

std::vector<bool> feasibility_mask(const ProblemInstance& inst) {
  const InstanceData& d = *inst.data;
  switch (inst.problem) {
    case Problem::PathTsp:
    case Problem::PathAtsp: {
      std::vector<bool> mask(inst.active.size() + 2, false);
      for (std::size_t i = 0; i < inst.active.size(); ++i) mask[2 + i] = true;
      return mask;
    }
    case Problem::PathCvrp: {
      std::vector<bool> mask(2 * (inst.active.size() + 2), false);
      for (std::size_t i = 0; i < inst.active.size(); ++i) {
        const double load = d.demand[inst.active[i]];
        mask[2 * (2 + i)] = load <= inst.capacity;
        mask[2 * (2 + i) + 1] = load <= inst.full_capacity;
      }
      return mask;
    }
    case Problem::PathOp: {
      std::vector<bool> mask(inst.active.size() + 2, false);
      for (std::size_t i = 0; i < inst.active.size(); ++i) {
        const int q = inst.active[i];
        mask[2 + i] =
            d.dist(inst.origin, q) + d.dist(q, inst.destination) <= inst.capacity;
      }
      return mask;
    }
    case Problem::Kp: {
      std::vector<bool> mask(inst.active.size(), false);
      for (std::size_t i = 0; i < inst.active.size(); ++i)
        mask[i] = d.weight[inst.active[i]] <= inst.capacity;
      return mask;
    }
  }
  return {};
}

int feature_dim(Problem p, int ident_dim, bool append_ident) {
  int base = 0;
  switch (p) {
    case Problem::PathTsp: base = 2; break;
    case Problem::PathAtsp: return ident_dim;
    case Problem::PathCvrp: base = 4; break;
    case Problem::PathOp: base = 4; break;
    case Problem::Kp: base = 3; break;
  }
  return base + (append_ident ? 1 : 0);
}

std::vector<double> feature_matrix(const ProblemInstance& inst, bool append_ident) {
  const InstanceData& d = *inst.data;
  const std::vector<int> tokens = token_nodes(inst);
  const std::size_t n = tokens.size();
  const int dim = feature_dim(inst.problem, d.ident_dim, append_ident);
  std::vector<double> f(static_cast<std::size_t>(dim) * n, 0.0);
  auto at = [&](int row, std::size_t col) -> double& { return f[row * n + col]; };

  switch (inst.problem) {
    case Problem::PathTsp:
      for (std::size_t j = 0; j < n; ++j) {
        at(0, j) = d.xs[tokens[j]];
        at(1, j) = d.ys[tokens[j]];
      }
      break;
    case Problem::PathAtsp:
      for (std::size_t j = 0; j < n; ++j)
        for (int r = 0; r < d.ident_dim; ++r)
          at(r, j) = d.ident[static_cast<std::size_t>(r) * d.node_count() + tokens[j]];
      return f;
    case Problem::PathCvrp:
      for (std::size_t j = 0; j < n; ++j) {
        at(0, j) = d.xs[tokens[j]];
        at(1, j) = d.ys[tokens[j]];
        // Demand in units of the full capacity, zero at origin and depot.
        at(2, j) = j < 2 ? 0.0 : d.demand[tokens[j]] / inst.full_capacity;
        at(3, j) = inst.capacity / inst.full_capacity;
      }
      break;
    case Problem::PathOp:
      for (std::size_t j = 0; j < n; ++j) {
        at(0, j) = d.xs[tokens[j]];
        at(1, j) = d.ys[tokens[j]];
        at(2, j) = j < 2 ? 0.0 : d.prize[tokens[j]];
        at(3, j) = inst.capacity;
      }
      break;
    case Problem::Kp:
      for (std::size_t j = 0; j < n; ++j) {
        at(0, j) = d.value[tokens[j]];
        at(1, j) = d.weight[tokens[j]];
        at(2, j) = inst.capacity;
      }
      break;
  }
  if (append_ident) {
    if (d.ident_dim < 1)
      throw Error(ErrorCategory::InvalidConfig, "feature_matrix: no identifier channel in data");
    for (std::size_t j = 0; j < n; ++j) at(dim - 1, j) = d.ident[tokens[j]];
  }
  return f;
}

std::vector<double> conv_edge_weights(const ProblemInstance& inst, bool row_minmax) {
  if (inst.problem != Problem::PathAtsp) return {};
  const InstanceData& d = *inst.data;
  const std::vector<int> tokens = token_nodes(inst);
  const std::size_t n = tokens.size();
  std::vector<double> w(n * n, 0.0);
  double global_lo = 0.0, global_hi = 0.0;
  bool global_first = true;
  if (!row_minmax) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double c = d.dist(tokens[i], tokens[j]);
        global_lo = global_first ? c : std::min(global_lo, c);
        global_hi = global_first ? c : std::max(global_hi, c);
        global_first = false;
      }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double lo = global_lo, hi = global_hi;
    if (row_minmax) {
      bool first = true;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double c = d.dist(tokens[i], tokens[j]);
        lo = first ? c : std::min(lo, c);
        hi = first ? c : std::max(hi, c);
        first = false;
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = d.dist(tokens[i], tokens[j]);
      const double norm = hi > lo ? (c - lo) / (hi - lo) : 0.0;
      w[i * n + j] = 1.0 - norm;
    }
  }
  return w;
}

namespace {

bool same_data(const InstanceData& a, const InstanceData& b) {
  return a.xs == b.xs && a.ys == b.ys && a.cost == b.cost && a.ident == b.ident &&
         a.ident_dim == b.ident_dim && a.demand == b.demand && a.prize == b.prize &&
         a.weight == b.weight && a.value == b.value;
}

}  // namespace

bool same_state(const ProblemInstance& a, const ProblemInstance& b) {
  if (a.problem != b.problem) return false;
  if (a.data != b.data && !same_data(*a.data, *b.data)) return false;
  if (a.active != b.active || a.origin != b.origin || a.destination != b.destination)
    return false;
  return std::abs(a.capacity - b.capacity) <= 1e-9 &&
         std::abs(a.full_capacity - b.full_capacity) <= 1e-9;
}

std::string state_key(const ProblemInstance& inst) {
  char buf[64];
  std::string key = problem_name(inst.problem);
  std::snprintf(buf, sizeof(buf), "|o%d|d%d|", inst.origin, inst.destination);
  key += buf;
  std::snprintf(buf, sizeof(buf), "c%.9f|C%.9f|", inst.capacity, inst.full_capacity);
  key += buf;
  for (int q : inst.active) {
    key += std::to_string(q);
    key += ',';
  }
  return key;
}

}  // namespace bqmdp
