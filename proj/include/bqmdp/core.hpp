#pragma once

#include <compare>
#include <cstddef>
#include <vector>

#include "bqmdp/common.hpp"

namespace bqmdp {

// One atomic construction move. For routing problems `node` is a node index
// and `via_depot` marks the paired depot-then-node move (CVRP only). For the
// knapsack, `node` is an item index. A Step is never the neutral element.
struct Step {
  int node = -1;
  bool via_depot = false;

  friend auto operator<=>(const Step&, const Step&) = default;
};

// The two monoid shapes used here: node sequences (concatenation) and item
// sets (union, canonically stored sorted).
enum class MonoidKind { Sequence, ItemSet };

// Element of the solution-space monoid. The empty value is the neutral
// element; composition with it on either side is the identity.
class PartialSolution {
public:
  PartialSolution() = default;
  explicit PartialSolution(MonoidKind kind) : kind_(kind) {}
  PartialSolution(MonoidKind kind, std::vector<Step> steps);

  static PartialSolution empty(MonoidKind kind) { return PartialSolution(kind); }
  static PartialSolution single(MonoidKind kind, Step z) {
    return PartialSolution(kind, std::vector<Step>{z});
  }

  MonoidKind kind() const { return kind_; }
  bool is_empty() const { return steps_.empty(); }
  std::size_t size() const { return steps_.size(); }
  const std::vector<Step>& steps() const { return steps_; }

  // Appends (sequence) or inserts (set) one step in place.
  void push(Step z);

  friend bool operator==(const PartialSolution&, const PartialSolution&) = default;

private:
  MonoidKind kind_ = MonoidKind::Sequence;
  std::vector<Step> steps_;  // ItemSet: sorted, duplicate-free
};

// x ∘ y. Total on the monoid; associative; the empty solution is two-sided
// neutral. Sequence: concatenation. ItemSet: union.
PartialSolution compose(const PartialSolution& x, const PartialSolution& y);

// All step sequences of length <= max_len that compose to x, each step
// strictly extending its prefix (so the count is finite: one sequence for the
// sequence monoid, k! for a k-item set). Throws BudgetExceeded when the
// enumeration tree outgrows node_budget.
std::vector<std::vector<Step>> step_decompositions(const PartialSolution& x,
                                                   std::size_t max_len,
                                                   std::size_t node_budget = 1u << 20);

}  // namespace bqmdp
