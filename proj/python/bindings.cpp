// Python bindings for the main operations: instance generation, exact
// oracles, the reduction map and its checker, the verification suites,
// imitation training, and greedy/beam inference.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bqmdp/bq_mdp.hpp"
#include "bqmdp/generate.hpp"
#include "bqmdp/imitation.hpp"
#include "bqmdp/io.hpp"
#include "bqmdp/oracles.hpp"
#include "bqmdp/search.hpp"
#include "bqmdp/verify.hpp"

namespace py = pybind11;
using namespace bqmdp;

namespace {

std::vector<std::pair<int, bool>> steps_out(const PartialSolution& x) {
  std::vector<std::pair<int, bool>> out;
  for (const Step& z : x.steps()) out.emplace_back(z.node, z.via_depot);
  return out;
}

PartialSolution steps_in(const ProblemInstance& inst,
                         const std::vector<std::pair<int, bool>>& steps) {
  PartialSolution x(inst.monoid_kind());
  for (const auto& [node, via] : steps) x.push(Step{node, via});
  return x;
}

Dataset dataset_from(const std::vector<ProblemInstance>& instances) {
  if (instances.empty()) throw Error(ErrorCategory::InvalidConfig, "empty instance list");
  Dataset ds;
  ds.problem = instances[0].problem;
  for (const ProblemInstance& inst : instances) {
    TrainingExample ex;
    ex.instance = inst;
    const ExactSolution sol = solve_exact(inst);
    ex.solution = sol.solution;
    ex.ref_objective = sol.objective;
    ds.items.push_back(std::move(ex));
  }
  return ds;
}

}  // namespace

PYBIND11_MODULE(_bqmdp, m) {
  m.doc() = "bisimulation-quotiented MDP toolkit for routing and packing problems";

  py::register_exception<Error>(m, "BqmdpError");

  py::class_<ProblemInstance>(m, "Instance")
      .def_property_readonly("problem",
                             [](const ProblemInstance& i) { return problem_name(i.problem); })
      .def_property_readonly("active", [](const ProblemInstance& i) { return i.active; })
      .def_property_readonly("origin", [](const ProblemInstance& i) { return i.origin; })
      .def_property_readonly("destination",
                             [](const ProblemInstance& i) { return i.destination; })
      .def_property_readonly("capacity", [](const ProblemInstance& i) { return i.capacity; })
      .def("to_json", [](const ProblemInstance& i) { return instance_to_json(i); })
      .def_static("from_json",
                  [](const std::string& line) { return instance_from_json(line); })
      .def("__repr__", [](const ProblemInstance& i) {
        return "<Instance " + std::string(problem_name(i.problem)) + " |active|=" +
               std::to_string(i.active.size()) + ">";
      });

  m.def(
      "generate",
      [](const std::string& problem, int n, std::uint64_t seed, double cvrp_capacity,
         double op_budget, double kp_capacity) {
        GenOptions opts;
        opts.cvrp_capacity = cvrp_capacity;
        opts.op_budget = op_budget;
        opts.kp_capacity = kp_capacity;
        Rng rng(seed);
        return generate_instance(problem_from_name(problem), n, rng, opts);
      },
      py::arg("problem"), py::arg("n"), py::arg("seed"), py::arg("cvrp_capacity") = 0.0,
      py::arg("op_budget") = 0.0, py::arg("kp_capacity") = 0.0,
      "One fresh random instance; deterministic per seed.");

  m.def(
      "solve_exact",
      [](const ProblemInstance& inst) {
        const ExactSolution sol = solve_exact(inst);
        return py::make_tuple(steps_out(sol.solution), sol.objective);
      },
      py::arg("instance"), "Oracle solution as (steps, objective).");

  m.def(
      "objective",
      [](const ProblemInstance& inst, const std::vector<std::pair<int, bool>>& steps) {
        return objective(inst, steps_in(inst, steps));
      },
      py::arg("instance"), py::arg("steps"));

  m.def(
      "allowed_steps",
      [](const ProblemInstance& inst) {
        std::vector<std::pair<int, bool>> out;
        for (const Step& z : allowed_steps(inst)) out.emplace_back(z.node, z.via_depot);
        return out;
      },
      py::arg("instance"));

  m.def(
      "reduce",
      [](const ProblemInstance& inst, int node, bool via_depot) {
        const ReduceResult r = reduce(inst, Step{node, via_depot});
        return py::make_tuple(r.next, r.reward);
      },
      py::arg("instance"), py::arg("node"), py::arg("via_depot") = false,
      "One BQ-MDP transition: (next instance, reward).");

  m.def(
      "phi",
      [](const ProblemInstance& inst, const std::vector<std::pair<int, bool>>& steps) {
        return phi(inst, steps_in(inst, steps));
      },
      py::arg("instance"), py::arg("steps"),
      "Map a partial solution to its tail subproblem.");

  m.def(
      "check_bisimulation",
      [](const ProblemInstance& inst, const std::vector<std::pair<int, bool>>& steps,
         int node, bool via_depot) {
        const BisimReport r =
            check_bisimulation(inst, steps_in(inst, steps), Step{node, via_depot});
        return py::make_tuple(r.pass, bisim_leg_name(r.first_violation), r.detail);
      },
      py::arg("instance"), py::arg("steps"), py::arg("node"), py::arg("via_depot") = false);

  m.def(
      "bisimulation_suite",
      [](const std::string& problem, int triples, std::uint64_t seed) {
        const SuiteResult r = bisimulation_suite(problem_from_name(problem), triples, seed);
        return py::dict(py::arg("pass") = r.pass, py::arg("checked") = r.checked,
                        py::arg("failures") = r.failures,
                        py::arg("first_failure") = r.first_failure);
      },
      py::arg("problem"), py::arg("triples") = 200, py::arg("seed") = 1);

  m.def(
      "soundness_suite",
      [](const std::string& problem, int instances, int max_decisions, std::uint64_t seed) {
        const SuiteResult r =
            soundness_suite(problem_from_name(problem), instances, max_decisions, seed);
        return py::dict(py::arg("pass") = r.pass, py::arg("checked") = r.checked,
                        py::arg("failures") = r.failures,
                        py::arg("first_failure") = r.first_failure);
      },
      py::arg("problem"), py::arg("instances") = 20, py::arg("max_decisions") = 6,
      py::arg("seed") = 1);

  py::class_<PolicyModel>(m, "Policy")
      .def_property_readonly("param_count", &PolicyModel::param_count)
      .def_property_readonly(
          "problem", [](const PolicyModel& p) { return problem_name(p.config().problem); })
      .def("save", &PolicyModel::save, py::arg("path"))
      .def_static("load", &PolicyModel::load, py::arg("path"));

  m.def(
      "train",
      [](const std::vector<ProblemInstance>& instances, int epochs, int batch_size, double lr,
         std::uint64_t seed, int embed_dim, int ff_dim, int heads, int layers, int workers) {
        TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        cfg.lr = lr;
        cfg.seed = seed;
        cfg.embed_dim = embed_dim;
        cfg.ff_dim = ff_dim;
        cfg.heads = heads;
        cfg.layers = layers;
        cfg.workers = workers;
        return train(dataset_from(instances), nullptr, cfg);
      },
      py::arg("instances"), py::arg("epochs") = 5, py::arg("batch_size") = 64,
      py::arg("lr") = 7.5e-4, py::arg("seed") = 1, py::arg("embed_dim") = 32,
      py::arg("ff_dim") = 64, py::arg("heads") = 4, py::arg("layers") = 2,
      py::arg("workers") = 0,
      "Imitation training on oracle solutions of the given instances.");

  m.def(
      "greedy",
      [](const PolicyModel& model, const ProblemInstance& inst, int knn) {
        SearchOptions opts;
        opts.knn = knn;
        const RolloutResult r = greedy_rollout(model, inst, opts);
        return py::make_tuple(steps_out(r.solution), r.objective);
      },
      py::arg("policy"), py::arg("instance"), py::arg("knn") = 0);

  m.def(
      "beam",
      [](const PolicyModel& model, const ProblemInstance& inst, int width, int knn) {
        SearchOptions opts;
        opts.knn = knn;
        const RolloutResult r = beam_search(model, inst, width, opts);
        return py::make_tuple(steps_out(r.solution), r.objective);
      },
      py::arg("policy"), py::arg("instance"), py::arg("width") = 16, py::arg("knn") = 0);

  m.def("optimality_gap",
        [](const std::string& problem, double objective, double ref) {
          return optimality_gap(problem_from_name(problem), objective, ref);
        },
        py::arg("problem"), py::arg("objective"), py::arg("ref"));

  m.attr("__version__") = "0.1.0";
}
