#include "ideal/theory.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ideal/error.hpp"
#include "ideal/parallel.hpp"
#include "ideal/rng.hpp"
#include "ideal/selection.hpp"

namespace ideal {
namespace {

constexpr double kWeights[] = {0.0, 0.25, 0.5, 0.75, 1.0};
constexpr double kEdgeDensity = 0.4;

CheckOutcome start(std::string name) {
  CheckOutcome out;
  out.name = std::move(name);
  out.graphs = 1;
  out.worst_margin = std::numeric_limits<double>::infinity();
  return out;
}

void record(CheckOutcome& out, double margin) {
  ++out.instances;
  out.worst_margin = std::min(out.worst_margin, margin);
  if (margin < -kTheoryTolerance) ++out.violations;
}

void require_size(const InfluenceTable& f, std::size_t max_n, const char* check) {
  if (f.size() > max_n) {
    fail_usage(std::string(check) + " supports at most " + std::to_string(max_n) +
               " vertices, graph has " + std::to_string(f.size()));
  }
}

struct GreedyVsOptimum {
  GreedyTrace greedy;
  double optimum;
};

GreedyVsOptimum solve(const InfluenceTable& f, std::size_t m) {
  check_budget(f.size(), m);
  const SetFunction value = [&f](std::span<const VertexId> set, unsigned) {
    return f[to_mask(set)];
  };
  GreedyVsOptimum out;
  out.greedy = greedy_maximize(f.size(), m, value, /*lazy=*/false, 1);
  out.optimum = 0.0;
  for (SubsetMask set = 0; set <= f.full(); ++set) {
    if (static_cast<std::size_t>(std::popcount(set)) == m) out.optimum = std::max(out.optimum, f[set]);
  }
  return out;
}

}  // namespace

double bound_value(std::size_t m) {
  if (m < 1) fail_usage("budget must be at least 1");
  const double md = static_cast<double>(m);
  return 1.0 - std::pow(1.0 - 1.0 / md, md);
}

void CheckOutcome::merge(const CheckOutcome& other) {
  graphs += other.graphs;
  instances += other.instances;
  violations += other.violations;
  worst_margin = std::min(worst_margin, other.worst_margin);
  failing_graph_seeds.insert(failing_graph_seeds.end(), other.failing_graph_seeds.begin(),
                             other.failing_graph_seeds.end());
}

CheckOutcome check_monotone(const InfluenceTable& f) {
  require_size(f, 8, "monotonicity check");
  auto out = start("monotone");
  const std::size_t n = f.size();
  for (SubsetMask set = 0; set <= f.full(); ++set) {
    for (std::size_t v = 0; v < n; ++v) {
      const SubsetMask bit = SubsetMask{1} << v;
      const double gain = f[set | bit] - f[set];
      if (set & bit) {
        record(out, gain == 0.0 ? 0.0 : -std::abs(gain));
        continue;
      }
      // A newcomer never lowers influence, and the enlarged set counts at
      // least itself. The gain can be 0 when S reaches v through sure edges.
      const double floor = static_cast<double>(std::popcount(set)) + 1.0;
      record(out, std::min(gain, f[set | bit] - floor));
    }
  }
  return out;
}

CheckOutcome check_submodular(const InfluenceTable& f) {
  require_size(f, 6, "submodularity check");
  auto out = start("submodular");
  const std::size_t n = f.size();
  for (SubsetMask larger = 0; larger <= f.full(); ++larger) {
    // Proper subsets of `larger`, including the empty set.
    for (SubsetMask smaller = (larger - 1) & larger;; smaller = (smaller - 1) & larger) {
      if (smaller != larger) {
        for (std::size_t v = 0; v < n; ++v) {
          const SubsetMask bit = SubsetMask{1} << v;
          const double small_gain = f[smaller | bit] - f[smaller];
          const double large_gain = f[larger | bit] - f[larger];
          record(out, small_gain - large_gain);
        }
      }
      if (smaller == 0) break;
    }
  }
  return out;
}

CheckOutcome check_step_bound(const InfluenceTable& f, std::size_t m) {
  auto out = start("step_bound");
  const auto solved = solve(f, m);
  const auto md = static_cast<double>(m);
  for (std::size_t t = 0; t + 1 < m; ++t) {
    const double value_t = t == 0 ? 0.0 : solved.greedy.values[t - 1];
    const double next_gain = solved.greedy.gains[t];
    record(out, value_t + md * next_gain - solved.optimum);
  }
  return out;
}

CheckOutcome check_approximation_ratio(const InfluenceTable& f, std::size_t m) {
  auto out = start("approximation_ratio");
  const auto solved = solve(f, m);
  record(out, solved.greedy.values.back() / solved.optimum - bound_value(m));
  return out;
}

CheckOutcome check_monotone(const DiffusionGraph& g) { return check_monotone(InfluenceTable(g)); }
CheckOutcome check_submodular(const DiffusionGraph& g) {
  return check_submodular(InfluenceTable(g));
}
CheckOutcome check_step_bound(const DiffusionGraph& g, std::size_t m) {
  return check_step_bound(InfluenceTable(g), m);
}
CheckOutcome check_approximation_ratio(const DiffusionGraph& g, std::size_t m) {
  return check_approximation_ratio(InfluenceTable(g), m);
}

DiffusionGraph random_admissible_graph(std::uint64_t seed, std::size_t min_n, std::size_t max_n,
                                       std::size_t max_uncertain) {
  if (min_n < 1 || min_n > max_n) fail_usage("invalid graph size range");
  SplitMix64 rng(seed);
  const std::size_t n = min_n + rng.below(max_n - min_n + 1);
  std::vector<EdgeSpec> edges;
  for (VertexId v = 0; v < n; ++v) {
    for (VertexId u = 0; u < n; ++u) {
      if (u == v || rng.uniform() >= kEdgeDensity) continue;
      edges.push_back({v, u, kWeights[rng.below(5)]});
    }
  }
  std::size_t uncertain = 0;
  for (auto& edge : edges) {
    if (edge.probability <= 0.0 || edge.probability >= 1.0) continue;
    if (++uncertain > max_uncertain) edge.probability = rng.below(2) == 0 ? 0.0 : 1.0;
  }
  return DiffusionGraph::from_edges(n, std::move(edges));
}

std::uint64_t theory_graph_seed(std::uint64_t master, std::size_t check, std::size_t trial) {
  return mix_keys(mix_keys(master, check), trial);
}

TheoryReport run_theory_checks(const TheoryConfig& config) {
  if (config.trials < 1) fail_usage("trials must be at least 1");
  const std::size_t max_budget =
      config.budgets.empty() ? 1 : *std::max_element(config.budgets.begin(), config.budgets.end());
  struct Plan {
    const char* name;
    std::size_t min_n;
    std::size_t max_n;
  };
  const Plan plans[] = {
      {"monotone", 2, config.monotone_max_n},
      {"submodular", 2, config.submodular_max_n},
      {"step_bound", std::max<std::size_t>(2, max_budget), config.step_bound_max_n},
      {"approximation_ratio", std::max<std::size_t>(2, max_budget), config.ratio_max_n},
  };

  TheoryReport report;
  for (std::size_t check = 0; check < 4; ++check) {
    const auto& plan = plans[check];
    std::vector<CheckOutcome> outcomes(config.trials);
    std::vector<GraphDescriptor> graphs(config.trials);
    parallel_for(config.trials, config.threads, [&](std::size_t trial) {
      const auto seed = theory_graph_seed(config.seed, check, trial);
      const auto g = random_admissible_graph(seed, plan.min_n, plan.max_n, config.max_uncertain);
      const InfluenceTable f(g);
      CheckOutcome outcome;
      if (check == 0) {
        outcome = check_monotone(f);
      } else if (check == 1) {
        outcome = check_submodular(f);
      } else {
        for (std::size_t i = 0; i < config.budgets.size(); ++i) {
          auto part = check == 2 ? check_step_bound(f, config.budgets[i])
                                 : check_approximation_ratio(f, config.budgets[i]);
          if (i == 0) {
            outcome = part;
          } else {
            part.graphs = 0;
            outcome.merge(part);
          }
        }
      }
      if (outcome.violations > 0) outcome.failing_graph_seeds.push_back(seed);
      outcomes[trial] = std::move(outcome);
      graphs[trial] = {plan.name, seed, g.size(), g.edge_count(), g.uncertain_edge_count()};
    });
    CheckOutcome merged = outcomes.front();
    for (std::size_t i = 1; i < outcomes.size(); ++i) merged.merge(outcomes[i]);
    report.checks.push_back(std::move(merged));
    report.graphs.insert(report.graphs.end(), graphs.begin(), graphs.end());
  }
  report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                            [](const CheckOutcome& c) { return c.violations == 0; });
  return report;
}

nlohmann::ordered_json report_to_json(const TheoryReport& report) {
  nlohmann::ordered_json doc;
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    nlohmann::ordered_json entry;
    entry["name"] = c.name;
    entry["graphs"] = c.graphs;
    entry["instances"] = c.instances;
    entry["violations"] = c.violations;
    entry["worst_margin"] = c.worst_margin;
    entry["failing_graph_seeds"] = c.failing_graph_seeds;
    checks.push_back(std::move(entry));
  }
  doc["checks"] = std::move(checks);
  auto graphs = nlohmann::ordered_json::array();
  for (const auto& g : report.graphs) {
    nlohmann::ordered_json entry;
    entry["check"] = g.check;
    entry["seed"] = g.seed;
    entry["n"] = g.n;
    entry["edges"] = g.edges;
    entry["uncertain_edges"] = g.uncertain_edges;
    graphs.push_back(std::move(entry));
  }
  doc["graphs"] = std::move(graphs);
  doc["pass"] = report.pass;
  return doc;
}

std::string format_report_table(const TheoryReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-19s %8s %12s %11s %14s  %s\n", "check", "graphs",
                "instances", "violations", "worst margin", "result");
  out += line;
  for (const auto& c : report.checks) {
    std::snprintf(line, sizeof line, "%-19s %8zu %12llu %11llu %14.6g  %s\n", c.name.c_str(),
                  c.graphs, static_cast<unsigned long long>(c.instances),
                  static_cast<unsigned long long>(c.violations), c.worst_margin,
                  c.violations == 0 ? "PASS" : "FAIL");
    out += line;
  }
  out += report.pass ? "overall: PASS\n" : "overall: FAIL\n";
  return out;
}

}  // namespace ideal
