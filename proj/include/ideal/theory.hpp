#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ideal/exact.hpp"
#include "ideal/graph.hpp"

namespace ideal {

// Approximation factor of greedy for monotone submodular maximization under
// a cardinality budget: 1 - (1 - 1/m)^m.
double bound_value(std::size_t m);

inline constexpr double kTheoryTolerance = 1e-9;

// Outcome of one check on one or more graphs. `worst_margin` is the smallest
// slack seen (left side minus right side of the inequality, or ratio minus
// bound); a violation is a margin below -kTheoryTolerance.
struct CheckOutcome {
  std::string name;
  std::size_t graphs = 0;
  std::uint64_t instances = 0;
  std::uint64_t violations = 0;
  double worst_margin = 0.0;
  std::vector<std::uint64_t> failing_graph_seeds;

  void merge(const CheckOutcome& other);
};

// All checks use exact influence (never Monte-Carlo estimates).
// For v not in S: f(S + v) >= f(S) and f(S + v) >= |S| + 1. For v in S the
// gain is exactly 0. n <= 8.
CheckOutcome check_monotone(const DiffusionGraph& g);
// f(Sa + v) - f(Sa) >= f(Sb + v) - f(Sb) for all Sa strictly inside Sb and
// all v. n <= 6.
CheckOutcome check_submodular(const DiffusionGraph& g);
// f(S*_m) <= f(S_t) + m * psi_{t+1} for every greedy step t in [0, m-1).
CheckOutcome check_step_bound(const DiffusionGraph& g, std::size_t m);
// f(S_m) / f(S*_m) >= bound_value(m).
CheckOutcome check_approximation_ratio(const DiffusionGraph& g, std::size_t m);

// Table-based variants, so one enumeration serves several checks.
CheckOutcome check_monotone(const InfluenceTable& f);
CheckOutcome check_submodular(const InfluenceTable& f);
CheckOutcome check_step_bound(const InfluenceTable& f, std::size_t m);
CheckOutcome check_approximation_ratio(const InfluenceTable& f, std::size_t m);

// Random graph on n in [min_n, max_n] vertices: each ordered pair is an edge
// with probability 0.4, weights drawn from {0, .25, .5, .75, 1}; excess
// uncertain edges beyond `max_uncertain` are rounded to 0 or 1. Fully
// determined by `seed`.
DiffusionGraph random_admissible_graph(std::uint64_t seed, std::size_t min_n, std::size_t max_n,
                                       std::size_t max_uncertain);

struct TheoryConfig {
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t monotone_max_n = 7;
  std::size_t submodular_max_n = 5;
  std::size_t step_bound_max_n = 7;
  std::size_t ratio_max_n = 8;
  std::vector<std::size_t> budgets = {2, 3};
  std::size_t max_uncertain = 12;
  unsigned threads = 0;
};

struct GraphDescriptor {
  std::string check;
  std::uint64_t seed;
  std::size_t n;
  std::size_t edges;
  std::size_t uncertain_edges;
};

struct TheoryReport {
  std::vector<GraphDescriptor> graphs;
  std::vector<CheckOutcome> checks;
  bool pass = false;
};

// Generates `trials` graphs per check and runs every check on each.
TheoryReport run_theory_checks(const TheoryConfig& config);

// Per-check graph seed; replaying random_admissible_graph with it rebuilds
// the exact graph a report refers to.
std::uint64_t theory_graph_seed(std::uint64_t master, std::size_t check, std::size_t trial);

nlohmann::ordered_json report_to_json(const TheoryReport& report);
std::string format_report_table(const TheoryReport& report);

}  // namespace ideal
