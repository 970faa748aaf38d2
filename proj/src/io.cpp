#include "bqmdp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace bqmdp {

using nlohmann::json;

namespace {

json coords_json(const InstanceData& d) {
  json arr = json::array();
  for (std::size_t i = 0; i < d.xs.size(); ++i) arr.push_back({d.xs[i], d.ys[i]});
  return arr;
}

}  // namespace

std::string instance_to_json(const ProblemInstance& inst, const PartialSolution* solution,
                             std::optional<double> ref) {
  const InstanceData& d = *inst.data;
  json j{{"problem", problem_name(inst.problem)}};
  switch (inst.problem) {
    case Problem::PathTsp:
      j["coords"] = coords_json(d);
      j["origin"] = inst.origin;
      j["destination"] = inst.destination;
      break;
    case Problem::PathAtsp:
      j["cost"] = d.cost;
      j["ident"] = d.ident;
      j["ident_dim"] = d.ident_dim;
      j["origin"] = inst.origin;
      j["destination"] = inst.destination;
      break;
    case Problem::PathCvrp:
      j["coords"] = coords_json(d);
      j["demands"] = d.demand;
      j["depot"] = inst.destination;
      j["origin"] = inst.origin;
      j["capacity"] = inst.capacity;
      j["full_capacity"] = inst.full_capacity;
      break;
    case Problem::PathOp:
      j["coords"] = coords_json(d);
      j["prizes"] = d.prize;
      j["depot"] = inst.destination;
      j["origin"] = inst.origin;
      j["budget"] = inst.capacity;
      break;
    case Problem::Kp:
      j["weights"] = d.weight;
      j["values"] = d.value;
      j["capacity"] = inst.capacity;
      break;
  }
  if (!d.ident.empty() && inst.problem != Problem::PathAtsp) {
    j["ident"] = d.ident;
    j["ident_dim"] = d.ident_dim;
  }
  j["active"] = inst.active;
  if (solution) {
    json steps = json::array();
    for (const Step& z : solution->steps()) steps.push_back({z.node, z.via_depot ? 1 : 0});
    j["solution"] = steps;
  }
  if (ref) j["ref"] = *ref;
  return j.dump();
}

ProblemInstance instance_from_json(const std::string& line, PartialSolution* solution,
                                   double* ref) {
  const json j = json::parse(line);
  const Problem problem = problem_from_name(j.at("problem").get<std::string>());
  auto data = std::make_shared<InstanceData>();
  if (j.contains("coords")) {
    for (const auto& pt : j.at("coords")) {
      data->xs.push_back(pt.at(0).get<double>());
      data->ys.push_back(pt.at(1).get<double>());
    }
  }
  if (j.contains("cost")) data->cost = j.at("cost").get<std::vector<double>>();
  if (j.contains("ident")) {
    data->ident = j.at("ident").get<std::vector<double>>();
    data->ident_dim = j.value("ident_dim", 1);
  }
  if (j.contains("demands")) data->demand = j.at("demands").get<std::vector<int>>();
  if (j.contains("prizes")) data->prize = j.at("prizes").get<std::vector<double>>();
  if (j.contains("weights")) data->weight = j.at("weights").get<std::vector<double>>();
  if (j.contains("values")) data->value = j.at("values").get<std::vector<double>>();

  std::vector<int> active = j.at("active").get<std::vector<int>>();
  ProblemInstance inst;
  switch (problem) {
    case Problem::PathTsp:
      inst = make_path_tsp(std::move(data), std::move(active), j.at("origin").get<int>(),
                           j.at("destination").get<int>());
      break;
    case Problem::PathAtsp:
      inst = make_path_atsp(std::move(data), std::move(active), j.at("origin").get<int>(),
                            j.at("destination").get<int>());
      break;
    case Problem::PathCvrp:
      inst = make_path_cvrp(std::move(data), std::move(active), j.at("depot").get<int>(),
                            j.at("origin").get<int>(), j.at("capacity").get<double>(),
                            j.at("full_capacity").get<double>());
      break;
    case Problem::PathOp:
      inst = make_path_op(std::move(data), std::move(active), j.at("origin").get<int>(),
                          j.at("depot").get<int>(), j.at("budget").get<double>());
      break;
    case Problem::Kp:
      inst = make_kp(std::move(data), std::move(active), j.at("capacity").get<double>());
      break;
  }
  if (solution) {
    *solution = PartialSolution::empty(inst.monoid_kind());
    if (j.contains("solution"))
      for (const auto& step : j.at("solution"))
        solution->push(Step{step.at(0).get<int>(), step.at(1).get<int>() != 0});
  }
  if (ref) *ref = j.value("ref", 0.0);
  return inst;
}

void write_instance_file(const std::string& path, const FileHeader& header,
                         const std::vector<TrainingExample>& items, bool with_solutions) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::Io, "cannot write " + path);
  json h{{"schema", header.schema},
         {"version", header.version},
         {"problem", problem_name(header.problem)},
         {"n", header.n},
         {"count", header.count},
         {"seed", header.seed}};
  out << h.dump() << "\n";
  for (const TrainingExample& ex : items) {
    if (with_solutions)
      out << instance_to_json(ex.instance, &ex.solution, ex.ref_objective) << "\n";
    else
      out << instance_to_json(ex.instance) << "\n";
  }
}

Dataset read_instance_file(const std::string& path, FileHeader* header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot read " + path);
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCategory::MalformedInput, path + ": missing header line");
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::MalformedInput, path + ": bad header: " + e.what());
  }
  if (h.value("schema", "") != "bqmdp/instances")
    throw Error(ErrorCategory::UnsupportedFormat, path + ": not an instance file");
  Dataset ds;
  ds.problem = problem_from_name(h.at("problem").get<std::string>());
  ds.seed = h.value("seed", 0ULL);
  if (header) {
    header->schema = h.value("schema", "");
    header->version = h.value("version", 1);
    header->problem = ds.problem;
    header->n = h.value("n", 0);
    header->count = h.value("count", 0);
    header->seed = ds.seed;
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    TrainingExample ex;
    try {
      ex.instance = instance_from_json(line, &ex.solution, &ex.ref_objective);
    } catch (const json::exception& e) {
      throw Error(ErrorCategory::MalformedInput,
                  path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    ds.items.push_back(std::move(ex));
  }
  return ds;
}

// --- TSPLib --------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// "KEY : value" / "KEY: value" / "KEY"
std::pair<std::string, std::string> split_keyword(const std::string& line) {
  const auto colon = line.find(':');
  if (colon == std::string::npos) return {trim(line), ""};
  return {trim(line.substr(0, colon)), trim(line.substr(colon + 1))};
}

}  // namespace

ProblemInstance parse_tsplib(const std::string& path, std::string* name) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot read " + path);
  int dimension = -1;
  std::string edge_type;
  auto data = std::make_shared<InstanceData>();
  std::string line;
  bool in_coords = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (in_coords) {
      if (line == "EOF") break;
      std::istringstream row(line);
      int id;
      double x, y;
      if (!(row >> id >> x >> y))
        throw Error(ErrorCategory::MalformedInput, path + ": bad NODE_COORD_SECTION row");
      data->xs.push_back(x);
      data->ys.push_back(y);
      continue;
    }
    const auto [key, value] = split_keyword(line);
    if (key == "NAME" && name) *name = value;
    else if (key == "TYPE" && value != "TSP")
      throw Error(ErrorCategory::UnsupportedFormat, path + ": TYPE " + value);
    else if (key == "DIMENSION") dimension = std::stoi(value);
    else if (key == "EDGE_WEIGHT_TYPE") edge_type = value;
    else if (key == "NODE_COORD_SECTION") {
      if (edge_type != "EUC_2D")
        throw Error(ErrorCategory::UnsupportedFormat,
                    path + ": EDGE_WEIGHT_TYPE " + (edge_type.empty() ? "missing" : edge_type));
      in_coords = true;
    } else if (key == "EOF") break;
  }
  if (!in_coords || dimension < 1 || static_cast<int>(data->xs.size()) != dimension)
    throw Error(ErrorCategory::MalformedInput, path + ": incomplete TSPLib file");
  std::vector<int> active(dimension - 1);
  std::iota(active.begin(), active.end(), 1);
  return make_path_tsp(std::move(data), std::move(active), 0, 0);
}

ProblemInstance parse_cvrplib(const std::string& path, std::string* name) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cannot read " + path);
  int dimension = -1, depot = -1;
  double capacity = -1.0;
  std::string edge_type;
  auto data = std::make_shared<InstanceData>();
  std::string line;
  enum class Section { None, Coords, Demands, Depot } section = Section::None;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (section == Section::Coords) {
      if (line.find_first_not_of("-0123456789. \teE") != std::string::npos) {
        section = Section::None;  // fall through to keyword handling
      } else {
        std::istringstream row(line);
        int id;
        double x, y;
        if (!(row >> id >> x >> y))
          throw Error(ErrorCategory::MalformedInput, path + ": bad NODE_COORD_SECTION row");
        data->xs.push_back(x);
        data->ys.push_back(y);
        continue;
      }
    } else if (section == Section::Demands) {
      if (line.find_first_not_of("-0123456789 \t") != std::string::npos) {
        section = Section::None;
      } else {
        std::istringstream row(line);
        int id, demand;
        if (!(row >> id >> demand))
          throw Error(ErrorCategory::MalformedInput, path + ": bad DEMAND_SECTION row");
        data->demand.push_back(demand);
        continue;
      }
    } else if (section == Section::Depot) {
      const int v = std::stoi(line);
      if (v == -1) {
        section = Section::None;
        continue;
      }
      depot = v - 1;
      continue;
    }
    const auto [key, value] = split_keyword(line);
    if (key == "NAME" && name) *name = value;
    else if (key == "TYPE" && value != "CVRP")
      throw Error(ErrorCategory::UnsupportedFormat, path + ": TYPE " + value);
    else if (key == "DIMENSION") dimension = std::stoi(value);
    else if (key == "CAPACITY") capacity = std::stod(value);
    else if (key == "EDGE_WEIGHT_TYPE") edge_type = value;
    else if (key == "NODE_COORD_SECTION") {
      if (edge_type != "EUC_2D")
        throw Error(ErrorCategory::UnsupportedFormat,
                    path + ": EDGE_WEIGHT_TYPE " + (edge_type.empty() ? "missing" : edge_type));
      section = Section::Coords;
    } else if (key == "DEMAND_SECTION") section = Section::Demands;
    else if (key == "DEPOT_SECTION") section = Section::Depot;
    else if (key == "EOF") break;
  }
  if (dimension < 1 || capacity <= 0 || depot < 0 ||
      static_cast<int>(data->xs.size()) != dimension ||
      static_cast<int>(data->demand.size()) != dimension)
    throw Error(ErrorCategory::MalformedInput, path + ": incomplete CVRPLib file");
  std::vector<int> active;
  for (int i = 0; i < dimension; ++i)
    if (i != depot) active.push_back(i);
  return make_path_cvrp(std::move(data), std::move(active), depot, depot, capacity, capacity);
}

void write_tsplib(const std::string& path, const ProblemInstance& inst,
                  const std::string& name) {
  if (inst.problem != Problem::PathTsp)
    throw Error(ErrorCategory::InvalidConfig, "write_tsplib: path-TSP instance required");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::Io, "cannot write " + path);
  const InstanceData& d = *inst.data;
  out << "NAME : " << name << "\n";
  out << "TYPE : TSP\n";
  out << "DIMENSION : " << d.xs.size() << "\n";
  out << "EDGE_WEIGHT_TYPE : EUC_2D\n";
  out << "NODE_COORD_SECTION\n";
  char buf[80];
  for (std::size_t i = 0; i < d.xs.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu %.17g %.17g\n", i + 1, d.xs[i], d.ys[i]);
    out << buf;
  }
  out << "EOF\n";
}

int euc2d_distance(double x1, double y1, double x2, double y2) {
  const double dx = x1 - x2, dy = y1 - y2;
  return static_cast<int>(std::lround(std::sqrt(dx * dx + dy * dy)));
}

double tsplib_route_cost(const ProblemInstance& inst, const PartialSolution& partial) {
  const InstanceData& d = *inst.data;
  const std::vector<int> walk = flatten_walk(inst, partial);
  double cost = 0.0;
  for (std::size_t i = 1; i < walk.size(); ++i)
    cost += euc2d_distance(d.xs[walk[i - 1]], d.ys[walk[i - 1]], d.xs[walk[i]], d.ys[walk[i]]);
  return cost;
}

// --- Report ----------------------------------------------------------------------

double Report::mean_gap() const {
  // instances without a usable reference (for OP a zero-prize optimum) have
  // no defined gap and stay out of the mean
  double sum = 0.0;
  int counted = 0;
  for (const EvalRecord& r : records)
    if (!std::isnan(r.gap)) {
      sum += r.gap;
      ++counted;
    }
  if (counted == 0) return std::numeric_limits<double>::quiet_NaN();
  return sum / counted;
}

std::string report_table(const Report& report) {
  std::ostringstream out;
  char buf[128];
  out << "index       value         ref      gap\n";
  for (const EvalRecord& r : report.records) {
    std::snprintf(buf, sizeof(buf), "%5d %11.6f %11.6f %7.2f%%\n", r.index, r.value, r.ref,
                  100.0 * r.gap);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "mean gap %.2f%% over %zu instances, %.2fs\n",
                100.0 * report.mean_gap(), report.records.size(), report.wall_seconds);
  out << buf;
  return out.str();
}

std::string report_json(const Report& report) {
  json records = json::array();
  for (const EvalRecord& r : report.records)
    records.push_back({{"index", r.index}, {"value", r.value}, {"ref", r.ref}, {"gap", r.gap}});
  const json j{{"problem", problem_name(report.problem)},
               {"count", report.records.size()},
               {"mean_gap", report.mean_gap()},
               {"wall_seconds", report.wall_seconds},
               {"records", records}};
  return j.dump();
}

// --- SVG --------------------------------------------------------------------------

void render_svg(const std::string& path, const ProblemInstance& inst,
                const PartialSolution* solution) {
  if (inst.problem == Problem::Kp || inst.problem == Problem::PathAtsp)
    throw Error(ErrorCategory::InvalidConfig, "render_svg: needs planar coordinates");
  const InstanceData& d = *inst.data;
  const double size = 640.0, margin = 20.0;
  double lo_x = d.xs[0], hi_x = d.xs[0], lo_y = d.ys[0], hi_y = d.ys[0];
  for (std::size_t i = 0; i < d.xs.size(); ++i) {
    lo_x = std::min(lo_x, d.xs[i]);
    hi_x = std::max(hi_x, d.xs[i]);
    lo_y = std::min(lo_y, d.ys[i]);
    hi_y = std::max(hi_y, d.ys[i]);
  }
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
  auto px = [&](int node) { return margin + (d.xs[node] - lo_x) / span * (size - 2 * margin); };
  auto py = [&](int node) { return margin + (hi_y - d.ys[node]) / span * (size - 2 * margin); };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf"};
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::Io, "cannot write " + path);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\">\n", size,
                size);
  out << buf;

  if (solution && !solution->is_empty()) {
    // One polyline per depot-to-depot leg (a single leg for TSP/OP).
    std::vector<int> walk = flatten_walk(inst, *solution);
    walk.erase(std::unique(walk.begin(), walk.end()), walk.end());
    std::vector<std::vector<int>> legs{{walk[0]}};
    for (std::size_t i = 1; i < walk.size(); ++i) {
      legs.back().push_back(walk[i]);
      if (inst.problem == Problem::PathCvrp && walk[i] == inst.destination &&
          i + 1 < walk.size())
        legs.push_back({walk[i]});
    }
    for (std::size_t t = 0; t < legs.size(); ++t) {
      out << "<polyline fill=\"none\" stroke=\"" << kColors[t % 7]
          << "\" stroke-width=\"1.5\" points=\"";
      for (int node : legs[t]) {
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(node), py(node));
        out << buf;
      }
      out << "\"/>\n";
    }
  }
  for (std::size_t i = 0; i < d.xs.size(); ++i) {
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"#333\"/>\n",
                  px(static_cast<int>(i)), py(static_cast<int>(i)));
    out << buf;
  }
  const int depot = inst.destination;
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"10\" height=\"10\" fill=\"#d62728\"/>\n",
                px(depot) - 5.0, py(depot) - 5.0);
  out << buf;
  out << "</svg>\n";
}

}  // namespace bqmdp
