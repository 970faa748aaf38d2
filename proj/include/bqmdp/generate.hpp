#pragma once

#include "bqmdp/common.hpp"
#include "bqmdp/problems.hpp"

namespace bqmdp {

// Generator defaults. Coordinates are uniform on the unit square; CVRP
// demands are uniform integers 1..9; OP prizes and KP weights/values are
// uniform on (0,1]. Capacities and budgets follow the documented size rules
// below unless overridden.
struct GenOptions {
  double cvrp_capacity = 0.0;  // <= 0: 50/80/100/250 at n=100/200/500/1000, else round(30+n/4)
  double op_budget = 0.0;      // <= 0: 2.0 * sqrt(n/100)
  double kp_capacity = 0.0;    // <= 0: 0.125 * n
  double atsp_noise = 0.2;     // multiplicative symmetry-breaking noise, U[1, 1+noise]
  int atsp_ident_dim = 4;      // random identifier channels for ATSP input
};

double default_cvrp_capacity(int n);
double default_op_budget(int n);
double default_kp_capacity(int n);

// One fresh instance. TSP/ATSP: n nodes, closed tour encoded as origin ==
// destination == node 0 with n-1 active customers. CVRP/OP: depot node 0
// plus n customers. KP: n items.
ProblemInstance generate_instance(Problem problem, int n, Rng& rng,
                                  const GenOptions& opts = {});

}  // namespace bqmdp
