#include "bqmdp/core.hpp"

#include <algorithm>

namespace bqmdp {

PartialSolution::PartialSolution(MonoidKind kind, std::vector<Step> steps)
    : kind_(kind), steps_(std::move(steps)) {
  if (kind_ == MonoidKind::ItemSet) {
    std::sort(steps_.begin(), steps_.end());
    steps_.erase(std::unique(steps_.begin(), steps_.end()), steps_.end());
  }
}

void PartialSolution::push(Step z) {
  if (kind_ == MonoidKind::Sequence) {
    steps_.push_back(z);
    return;
  }
  auto it = std::lower_bound(steps_.begin(), steps_.end(), z);
  if (it == steps_.end() || *it != z) steps_.insert(it, z);
}

PartialSolution compose(const PartialSolution& x, const PartialSolution& y) {
  PartialSolution out = x;
  for (const Step& z : y.steps()) out.push(z);
  return out;
}

namespace {

void enumerate_set_orders(const std::vector<Step>& items, std::vector<bool>& used,
                          std::vector<Step>& prefix, std::size_t max_len,
                          std::size_t node_budget, std::size_t& nodes,
                          std::vector<std::vector<Step>>& out) {
  if (++nodes > node_budget)
    throw Error(ErrorCategory::BudgetExceeded, "step_decompositions: enumeration budget exceeded");
  if (prefix.size() == items.size()) {
    out.push_back(prefix);
    return;
  }
  if (prefix.size() >= max_len) return;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    prefix.push_back(items[i]);
    enumerate_set_orders(items, used, prefix, max_len, node_budget, nodes, out);
    prefix.pop_back();
    used[i] = false;
  }
}

}  // namespace

std::vector<std::vector<Step>> step_decompositions(const PartialSolution& x,
                                                   std::size_t max_len,
                                                   std::size_t node_budget) {
  if (x.is_empty()) return {{}};
  if (x.kind() == MonoidKind::Sequence) {
    // Concatenation is cancellative, so the decomposition is unique.
    if (x.size() > max_len) return {};
    return {x.steps()};
  }
  std::vector<std::vector<Step>> out;
  std::vector<bool> used(x.size(), false);
  std::vector<Step> prefix;
  std::size_t nodes = 0;
  enumerate_set_orders(x.steps(), used, prefix, max_len, node_budget, nodes, out);
  return out;
}

}  // namespace bqmdp
