#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bqmdp/imitation.hpp"
#include "bqmdp/problems.hpp"

namespace bqmdp {

// --- JSON-lines instance / dataset files -------------------------------------
// First line is a header object {"schema","version","problem","n","count",
// "seed"}; each following line is one instance object with the problem tag,
// its arrays (coords/demands/prizes/weights/values or the cost matrix),
// scalars (capacity/budget), and optionally "solution" and "ref".

struct FileHeader {
  std::string schema = "bqmdp/instances";
  int version = 1;
  Problem problem = Problem::PathTsp;
  int n = 0;
  int count = 0;
  std::uint64_t seed = 0;
};

std::string instance_to_json(const ProblemInstance& inst,
                             const PartialSolution* solution = nullptr,
                             std::optional<double> ref = std::nullopt);
ProblemInstance instance_from_json(const std::string& line, PartialSolution* solution = nullptr,
                                   double* ref = nullptr);

void write_instance_file(const std::string& path, const FileHeader& header,
                         const std::vector<TrainingExample>& items, bool with_solutions);
Dataset read_instance_file(const std::string& path, FileHeader* header = nullptr);

// --- TSPLib / CVRPLib ---------------------------------------------------------

// EUC_2D only; anything else fails with UnsupportedFormat. Nodes map to a
// closed path-TSP (origin = destination = the first node).
ProblemInstance parse_tsplib(const std::string& path, std::string* name = nullptr);

// CVRP files with CAPACITY, NODE_COORD_SECTION, DEMAND_SECTION, DEPOT_SECTION.
ProblemInstance parse_cvrplib(const std::string& path, std::string* name = nullptr);

void write_tsplib(const std::string& path, const ProblemInstance& inst,
                  const std::string& name);

// Nearest-integer Euclidean distance, the TSPLib EUC_2D rule.
int euc2d_distance(double x1, double y1, double x2, double y2);

// Route cost under the EUC_2D integer metric (for scoring against published
// optima); same walk conventions as objective().
double tsplib_route_cost(const ProblemInstance& inst, const PartialSolution& partial);

// --- Gap / timing report ------------------------------------------------------

struct EvalRecord {
  int index = 0;
  double value = 0.0;  // reported metric: cost, or prize/value for OP/KP
  double ref = 0.0;
  double gap = 0.0;
};

struct Report {
  Problem problem = Problem::PathTsp;
  std::vector<EvalRecord> records;
  double wall_seconds = 0.0;

  double mean_gap() const;
};

// Fixed-width text table plus a JSON object with the same content.
std::string report_table(const Report& report);
std::string report_json(const Report& report);

// --- SVG rendering -------------------------------------------------------------

// Nodes always; route polylines when a solution is given (CVRP subtours
// color-cycled); depot/origin markers. Routing problems only.
void render_svg(const std::string& path, const ProblemInstance& inst,
                const PartialSolution* solution = nullptr);

}  // namespace bqmdp
