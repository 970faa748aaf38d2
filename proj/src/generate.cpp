#include "bqmdp/generate.hpp"

#include <cmath>
#include <memory>
#include <numeric>

namespace bqmdp {

double default_cvrp_capacity(int n) {
  switch (n) {
    case 100: return 50.0;
    case 200: return 80.0;
    case 500: return 100.0;
    case 1000: return 250.0;
    default: return static_cast<double>(std::lround(30.0 + n / 4.0));
  }
}

double default_op_budget(int n) { return 2.0 * std::sqrt(n / 100.0); }

double default_kp_capacity(int n) { return 0.125 * n; }

namespace {

void fill_coords(InstanceData& d, int count, Rng& rng) {
  d.xs.resize(count);
  d.ys.resize(count);
  for (int i = 0; i < count; ++i) {
    d.xs[i] = rng.next_double();
    d.ys[i] = rng.next_double();
  }
}

void fill_ident(InstanceData& d, int rows, Rng& rng) {
  const int count = d.node_count();
  d.ident_dim = rows;
  d.ident.resize(static_cast<std::size_t>(rows) * count);
  for (double& v : d.ident) v = rng.next_double();
}

std::vector<int> iota_from(int first, int count) {
  std::vector<int> v(count);
  std::iota(v.begin(), v.end(), first);
  return v;
}

}  // namespace

ProblemInstance generate_instance(Problem problem, int n, Rng& rng, const GenOptions& opts) {
  if (n < 1) throw Error(ErrorCategory::InvalidConfig, "generate_instance: n must be >= 1");
  auto data = std::make_shared<InstanceData>();
  switch (problem) {
    case Problem::PathTsp: {
      fill_coords(*data, n, rng);
      fill_ident(*data, 1, rng);
      return make_path_tsp(std::move(data), iota_from(1, n - 1), 0, 0);
    }
    case Problem::PathAtsp: {
      InstanceData coords;
      fill_coords(coords, n, rng);
      data->cost.assign(static_cast<std::size_t>(n) * n, 0.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          const double noise = 1.0 + opts.atsp_noise * rng.next_double();
          data->cost[static_cast<std::size_t>(i) * n + j] = coords.dist(i, j) * noise;
        }
      fill_ident(*data, opts.atsp_ident_dim, rng);
      return make_path_atsp(std::move(data), iota_from(1, n - 1), 0, 0);
    }
    case Problem::PathCvrp: {
      fill_coords(*data, n + 1, rng);
      data->demand.resize(n + 1, 0);
      for (int i = 1; i <= n; ++i) data->demand[i] = static_cast<int>(rng.next_int(1, 9));
      fill_ident(*data, 1, rng);
      const double cap = opts.cvrp_capacity > 0 ? opts.cvrp_capacity : default_cvrp_capacity(n);
      return make_path_cvrp(std::move(data), iota_from(1, n), 0, 0, cap, cap);
    }
    case Problem::PathOp: {
      fill_coords(*data, n + 1, rng);
      data->prize.resize(n + 1, 0.0);
      for (int i = 1; i <= n; ++i) data->prize[i] = rng.next_open_closed();
      fill_ident(*data, 1, rng);
      const double budget = opts.op_budget > 0 ? opts.op_budget : default_op_budget(n);
      return make_path_op(std::move(data), iota_from(1, n), 0, 0, budget);
    }
    case Problem::Kp: {
      data->weight.resize(n);
      data->value.resize(n);
      for (int i = 0; i < n; ++i) {
        data->weight[i] = rng.next_open_closed();
        data->value[i] = rng.next_open_closed();
      }
      const double cap = opts.kp_capacity > 0 ? opts.kp_capacity : default_kp_capacity(n);
      return make_kp(std::move(data), iota_from(0, n), cap);
    }
  }
  throw Error(ErrorCategory::InvalidConfig, "generate_instance: bad problem");
}

}  // namespace bqmdp
