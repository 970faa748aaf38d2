// Command-line front end: instance generation, exact solving, imitation
// training, greedy/beam evaluation, the verification suites, benchmarking and
// SVG rendering over the JSON-lines schemas.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "bqmdp/bq_mdp.hpp"
#include "bqmdp/generate.hpp"
#include "bqmdp/imitation.hpp"
#include "bqmdp/io.hpp"
#include "bqmdp/oracles.hpp"
#include "bqmdp/policy.hpp"
#include "bqmdp/search.hpp"
#include "bqmdp/verify.hpp"

namespace {

using namespace bqmdp;

int worker_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

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

// Instance files by extension: .tsp/.vrp are TSPLib/CVRPLib, otherwise the
// JSON-lines schema.
Dataset load_any(const std::string& path) {
  const std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".tsp") {
    Dataset ds;
    ds.problem = Problem::PathTsp;
    ds.items.push_back({parse_tsplib(path), PartialSolution(), 0.0});
    return ds;
  }
  if (ext == ".vrp") {
    Dataset ds;
    ds.problem = Problem::PathCvrp;
    ds.items.push_back({parse_cvrplib(path), PartialSolution(), 0.0});
    return ds;
  }
  return read_instance_file(path);
}

std::vector<TrainingExample> generate_many(Problem problem, int n, int count,
                                           std::uint64_t seed, const GenOptions& opts) {
  std::vector<TrainingExample> items(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    items[i].instance = generate_instance(problem, n, rng, opts);
  }
  return items;
}

void solve_many(std::vector<TrainingExample>& items, int workers) {
  parallel_for(static_cast<int>(items.size()), workers, [&](int i) {
    const ExactSolution sol = solve_exact(items[i].instance);
    items[i].solution = sol.solution;
    items[i].ref_objective = sol.objective;
  });
}

struct EvalOutcome {
  Report report;
  std::vector<RolloutResult> rollouts;
};

EvalOutcome run_eval(const PolicyModel& model, const Dataset& data, int beam, int knn,
                     int workers, bool tsplib_metric, bool beam_by_logprob = false) {
  EvalOutcome out;
  out.report.problem = data.problem;
  out.rollouts.resize(data.items.size());
  SearchOptions opts;
  opts.knn = knn;
  opts.select_by_logprob = beam_by_logprob;
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(static_cast<int>(data.items.size()), workers, [&](int i) {
    out.rollouts[i] = beam > 1 ? beam_search(model, data.items[i].instance, beam, opts)
                               : greedy_rollout(model, data.items[i].instance, opts);
  });
  out.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool maximization = data.problem == Problem::PathOp || data.problem == Problem::Kp;
  for (std::size_t i = 0; i < data.items.size(); ++i) {
    EvalRecord rec;
    rec.index = static_cast<int>(i);
    double obj = out.rollouts[i].objective;
    double ref = data.items[i].ref_objective;
    if (tsplib_metric) {
      obj = tsplib_route_cost(data.items[i].instance, out.rollouts[i].solution);
      if (!data.items[i].solution.is_empty())
        ref = tsplib_route_cost(data.items[i].instance, data.items[i].solution);
    }
    rec.value = maximization ? -obj : obj;
    rec.ref = maximization ? -ref : ref;
    rec.gap = ref != 0.0 ? optimality_gap(data.problem, obj, ref)
                         : std::numeric_limits<double>::quiet_NaN();
    out.report.records.push_back(rec);
  }
  return out;
}

// Results file: one JSON object per instance, no timing, so identical runs
// are byte-identical.
void write_results(const std::string& path, const EvalOutcome& out) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCategory::Io, "cannot write " + path);
  for (std::size_t i = 0; i < out.rollouts.size(); ++i) {
    std::string steps = "[";
    for (const Step& z : out.rollouts[i].solution.steps()) {
      if (steps.size() > 1) steps += ",";
      steps += "[" + std::to_string(z.node) + "," + (z.via_depot ? std::string("1") : "0") + "]";
    }
    steps += "]";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "{\"index\":%zu,\"value\":%.12f,\"solution\":", i,
                  out.report.records[i].value);
    f << buf << steps << "}\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bisimulation-quotiented MDP toolkit for routing and packing problems"};
  app.set_config("--config", "", "flat key=value config file; command-line flags win");
  app.require_subcommand(1);

  std::string problem_name_arg = "tsp", in_path, out_path, model_path, data_path,
              heldout_path, metrics_path;
  int n = 10, count = 100, beam = 1, knn = 250, workers = 0, index = 0;
  std::uint64_t seed = 1;
  GenOptions gen_opts;
  TrainConfig train_cfg;
  bool tsplib_metric = false, use_exact = false;
  int triples = 1000, instances = 100;

  auto add_common_gen = [&](CLI::App* cmd) {
    cmd->add_option("--problem", problem_name_arg, "tsp|atsp|cvrp|op|kp");
    cmd->add_option("--n", n, "instance size");
    cmd->add_option("--count", count, "number of instances");
    cmd->add_option("--seed", seed, "generator seed");
    cmd->add_option("--out", out_path, "output file")->required();
    cmd->add_option("--cvrp-capacity", gen_opts.cvrp_capacity, "override vehicle capacity");
    cmd->add_option("--op-budget", gen_opts.op_budget, "override distance budget");
    cmd->add_option("--kp-capacity", gen_opts.kp_capacity, "override knapsack capacity");
    cmd->add_option("--atsp-noise", gen_opts.atsp_noise, "symmetry-breaking noise");
  };

  CLI::App* generate = app.add_subcommand("generate", "write a random instance file");
  add_common_gen(generate);

  CLI::App* solve = app.add_subcommand("solve-exact", "attach oracle solutions to a file");
  solve->add_option("--in", in_path, "instance file")->required();
  solve->add_option("--out", out_path, "output file")->required();
  solve->add_option("--workers", workers, "worker threads (0 = cores)");

  CLI::App* make_ds = app.add_subcommand("make-dataset", "generate + solve in one step");
  add_common_gen(make_ds);
  make_ds->add_option("--workers", workers, "worker threads (0 = cores)");

  CLI::App* train_cmd = app.add_subcommand("train", "imitation training");
  train_cmd->add_option("--data", data_path, "dataset with solutions")->required();
  train_cmd->add_option("--heldout", heldout_path, "held-out dataset for the per-epoch gap");
  train_cmd->add_option("--out", model_path, "checkpoint path")->required();
  train_cmd->add_option("--epochs", train_cfg.epochs, "training epochs");
  train_cmd->add_option("--batch", train_cfg.batch_size, "minibatch size");
  train_cmd->add_option("--lr", train_cfg.lr, "initial learning rate");
  train_cmd->add_option("--seed", train_cfg.seed, "training seed");
  train_cmd->add_option("--workers", train_cfg.workers, "worker threads (0 = cores)");
  train_cmd->add_option("--embed-dim", train_cfg.embed_dim, "embedding size");
  train_cmd->add_option("--ff-dim", train_cfg.ff_dim, "feed-forward size");
  train_cmd->add_option("--heads", train_cfg.heads, "attention heads");
  train_cmd->add_option("--layers", train_cfg.layers, "transformer layers");
  train_cmd->add_option("--metrics", train_cfg.metrics_path, "JSON-lines metrics log");
  train_cmd->add_flag("--orientation-augment", train_cfg.orientation_augment,
                      "sample tour orientation per epoch");
  train_cmd->add_flag("--append-ident", train_cfg.append_ident,
                      "append the random-identifier input channel");
  bool conv_global_minmax = false;
  train_cmd->add_flag("--conv-global-minmax", conv_global_minmax,
                      "normalize ATSP edge weights over the whole matrix");

  CLI::App* eval_cmd = app.add_subcommand("eval", "greedy/beam rollouts over a file");
  eval_cmd->add_option("--model", model_path, "checkpoint")->required();
  eval_cmd->add_option("--data", data_path, "instance file")->required();
  eval_cmd->add_option("--out", out_path, "results file (JSON-lines, no timing)");
  eval_cmd->add_option("--beam", beam, "beam width (1 = greedy)");
  eval_cmd->add_option("--knn", knn, "model input restricted to k nearest nodes (0 = off)");
  eval_cmd->add_option("--workers", workers, "worker threads (0 = cores)");
  eval_cmd->add_flag("--tsplib-metric", tsplib_metric, "score with integer EUC_2D distances");
  bool beam_by_logprob = false;
  eval_cmd->add_flag("--beam-by-logprob", beam_by_logprob,
                     "pick the completed beam by log-probability instead of objective");

  CLI::App* verify_cmd = app.add_subcommand("verify", "bisimulation + soundness suites");
  verify_cmd->add_option("--triples", triples, "triples per problem");
  verify_cmd->add_option("--instances", instances, "tiny instances per problem");
  verify_cmd->add_option("--seed", seed, "suite seed");

  CLI::App* bench = app.add_subcommand("bench", "gap/timing report");
  bench->add_option("--model", model_path, "checkpoint")->required();
  bench->add_option("--data", data_path, "instance file with references")->required();
  bench->add_option("--beam", beam, "beam width (1 = greedy)");
  bench->add_option("--knn", knn, "model input restricted to k nearest nodes (0 = off)");
  bench->add_option("--workers", workers, "worker threads (0 = cores)");
  bench->add_flag("--tsplib-metric", tsplib_metric, "score with integer EUC_2D distances");

  CLI::App* render = app.add_subcommand("render", "SVG drawing of one instance");
  render->add_option("--in", in_path, "instance file")->required();
  render->add_option("--index", index, "instance index in the file");
  render->add_option("--out", out_path, "SVG path")->required();
  render->add_option("--model", model_path, "roll out this checkpoint instead");
  render->add_flag("--exact", use_exact, "draw the oracle solution");

  try {
    app.parse(argc, argv);

    if (*generate) {
      const Problem problem = problem_from_name(problem_name_arg);
      auto items = generate_many(problem, n, count, seed, gen_opts);
      write_instance_file(out_path, {"bqmdp/instances", 1, problem, n, count, seed}, items,
                          false);
      std::cout << "wrote " << count << " " << problem_name_arg << " instances to " << out_path
                << "\n";
    } else if (*solve) {
      Dataset ds = load_any(in_path);
      solve_many(ds.items, worker_count(workers));
      FileHeader header;
      header.problem = ds.problem;
      header.count = static_cast<int>(ds.items.size());
      header.seed = ds.seed;
      write_instance_file(out_path, header, ds.items, true);
      std::cout << "solved " << ds.items.size() << " instances\n";
    } else if (*make_ds) {
      const Problem problem = problem_from_name(problem_name_arg);
      auto items = generate_many(problem, n, count, seed, gen_opts);
      solve_many(items, worker_count(workers));
      write_instance_file(out_path, {"bqmdp/instances", 1, problem, n, count, seed}, items,
                          true);
      std::cout << "wrote dataset of " << count << " solved instances to " << out_path << "\n";
    } else if (*train_cmd) {
      train_cfg.conv_row_minmax = !conv_global_minmax;
      const Dataset ds = read_instance_file(data_path);
      Dataset heldout;
      if (!heldout_path.empty()) heldout = read_instance_file(heldout_path);
      const PolicyModel model =
          train(ds, heldout_path.empty() ? nullptr : &heldout, train_cfg, nullptr, &std::cout);
      model.save(model_path);
      std::cout << "saved checkpoint to " << model_path << "\n";
    } else if (*eval_cmd || *bench) {
      const PolicyModel model = PolicyModel::load(model_path);
      const Dataset ds = load_any(data_path);
      if (*bench)
        for (const TrainingExample& ex : ds.items)
          if (ex.solution.is_empty() && ex.ref_objective == 0.0)
            throw Error(ErrorCategory::MissingReference,
                        "bench: instance file has no reference solutions; run solve-exact");
      const EvalOutcome out = run_eval(model, ds, beam, knn, worker_count(workers),
                                       tsplib_metric, beam_by_logprob);
      if (*eval_cmd && !out_path.empty()) write_results(out_path, out);
      std::cout << report_table(out.report);
      if (*bench) std::cout << report_json(out.report) << "\n";
    } else if (*verify_cmd) {
      bool all_pass = true;
      for (Problem p : {Problem::PathTsp, Problem::PathAtsp, Problem::PathCvrp,
                        Problem::PathOp, Problem::Kp}) {
        const SuiteResult bis = bisimulation_suite(p, triples, derive_seed(seed, 11));
        std::cout << (bis.pass ? "PASS" : "FAIL") << " bisimulation " << problem_name(p) << " ("
                  << bis.checked << " triples)";
        if (!bis.pass) std::cout << " first: " << bis.first_failure;
        std::cout << "\n";
        const SuiteResult snd = soundness_suite(p, instances, 7, derive_seed(seed, 13));
        std::cout << (snd.pass ? "PASS" : "FAIL") << " soundness " << problem_name(p) << " ("
                  << snd.checked << " checks)";
        if (!snd.pass) std::cout << " first: " << snd.first_failure;
        std::cout << "\n";
        all_pass = all_pass && bis.pass && snd.pass;
      }
      if (!all_pass) return 1;
    } else if (*render) {
      const Dataset ds = load_any(in_path);
      if (index < 0 || index >= static_cast<int>(ds.items.size()))
        throw Error(ErrorCategory::InvalidConfig, "render: index out of range");
      const TrainingExample& ex = ds.items[index];
      PartialSolution solution = ex.solution;
      if (!model_path.empty())
        solution = greedy_rollout(PolicyModel::load(model_path), ex.instance).solution;
      else if (use_exact)
        solution = solve_exact(ex.instance).solution;
      render_svg(out_path, ex.instance, solution.is_empty() ? nullptr : &solution);
      std::cout << "wrote " << out_path << "\n";
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
