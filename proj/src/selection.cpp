#include "ideal/selection.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <queue>

#include "ideal/error.hpp"
#include "ideal/exact.hpp"
#include "ideal/parallel.hpp"

namespace ideal {
namespace {

struct HeapEntry {
  double gain;
  VertexId vertex;
  std::size_t stamp;  // step at which `gain` was computed
};

// Max-heap on gain, then min-heap on vertex.
struct HeapOrder {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.vertex > b.vertex;
  }
};

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > cap) return cap + 1;
  }
  return static_cast<std::uint64_t>(result);
}

}  // namespace

std::string_view method_name(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::ideal: return "ideal";
    case SelectionMethod::ideal_lazy: return "ideal-lazy";
    case SelectionMethod::random: return "random";
    case SelectionMethod::kmeans: return "kmeans";
    case SelectionMethod::mfl: return "mfl";
    case SelectionMethod::fast_votek: return "fast-votek";
    case SelectionMethod::brute_force: return "brute-force";
  }
  return "unknown";
}

SelectionMethod parse_method(std::string_view name) {
  for (auto method : {SelectionMethod::ideal, SelectionMethod::ideal_lazy, SelectionMethod::random,
                      SelectionMethod::kmeans, SelectionMethod::mfl, SelectionMethod::fast_votek,
                      SelectionMethod::brute_force}) {
    if (method_name(method) == name) return method;
  }
  fail_usage("unknown method '" + std::string(name) +
             "' (expected ideal, ideal-lazy, random, kmeans, mfl, fast-votek or brute-force)");
}

void check_budget(std::size_t n, std::size_t m) {
  if (m < 1) fail_usage("budget must be at least 1");
  if (m > n) {
    fail_usage("budget " + std::to_string(m) + " exceeds pool size " + std::to_string(n));
  }
}

GreedyTrace greedy_maximize(std::size_t n, std::size_t m, const SetFunction& f, bool lazy,
                            unsigned threads) {
  check_budget(n, m);
  GreedyTrace trace;
  std::vector<char> chosen(n, 0);
  double current = 0.0;

  auto commit = [&](VertexId v, double value) {
    trace.selected.push_back(v);
    trace.gains.push_back(value - current);
    trace.values.push_back(value);
    chosen[v] = 1;
    current = value;
  };

  // f(S + v) for every v not in S, evaluated concurrently into fixed slots.
  auto evaluate_all = [&](std::vector<VertexId>& candidates, std::vector<double>& values) {
    candidates.clear();
    for (VertexId v = 0; v < n; ++v) {
      if (!chosen[v]) candidates.push_back(v);
    }
    values.assign(candidates.size(), 0.0);
    parallel_for(candidates.size(), threads, [&](std::size_t i) {
      std::vector<VertexId> set = trace.selected;
      set.push_back(candidates[i]);
      values[i] = f(set, 1);
    });
    trace.evaluations += candidates.size();
  };

  std::vector<VertexId> candidates;
  std::vector<double> values;
  if (!lazy) {
    for (std::size_t step = 0; step < m; ++step) {
      evaluate_all(candidates, values);
      std::size_t best = 0;
      for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (values[i] > values[best]) best = i;  // strict: lowest index wins ties
      }
      commit(candidates[best], values[best]);
    }
    return trace;
  }

  evaluate_all(candidates, values);
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder> heap;
  for (std::size_t i = 0; i < candidates.size(); ++i) heap.push({values[i], candidates[i], 0});
  const unsigned inner = resolve_threads(threads);
  while (trace.selected.size() < m) {
    const std::size_t step = trace.selected.size();
    HeapEntry top = heap.top();
    heap.pop();
    if (top.stamp == step) {
      commit(top.vertex, current + top.gain);
      continue;
    }
    std::vector<VertexId> set = trace.selected;
    set.push_back(top.vertex);
    top.gain = f(set, inner) - current;
    top.stamp = step;
    ++trace.evaluations;
    heap.push(top);
  }
  return trace;
}

SelectionResult greedy_select(const DiffusionGraph& g, std::size_t m,
                              const GreedyOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_budget(g.size(), m);
  if (options.reps < 1) fail_usage("reps must be at least 1");
  // The greedy core compares exact integer activation totals; means are
  // derived only for reporting.
  const SetFunction influence = [&](std::span<const VertexId> set, unsigned inner) {
    InfluenceOptions io{options.mode, inner};
    return static_cast<double>(estimate_influence(g, set, options.reps, options.seed, io).total);
  };
  const auto trace = greedy_maximize(g.size(), m, influence, options.lazy, options.threads);

  SelectionResult result;
  result.method = options.lazy ? SelectionMethod::ideal_lazy : SelectionMethod::ideal;
  result.budget = m;
  result.selected = trace.selected;
  for (double gain : trace.gains) result.marginal_gains.push_back(gain / options.reps);
  result.objective = trace.values.back() / options.reps;
  result.seed = options.seed;
  result.evaluations = trace.evaluations;
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

SelectionResult brute_force_optimal(const DiffusionGraph& g, std::size_t m) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = g.size();
  check_budget(n, m);
  constexpr std::uint64_t kMaxSubsets = 1'000'000;
  if (binomial_capped(n, m, kMaxSubsets) > kMaxSubsets) {
    fail_usage("brute force over C(" + std::to_string(n) + ", " + std::to_string(m) +
               ") subsets exceeds the limit of 10^6");
  }
  std::optional<InfluenceTable> table;
  if (n <= kMaxTableVertices) table.emplace(g);
  auto value = [&](std::span<const VertexId> set) {
    return table ? (*table)[to_mask(set)] : exact_influence(g, set);
  };

  std::vector<VertexId> combo(m);
  for (std::size_t i = 0; i < m; ++i) combo[i] = static_cast<VertexId>(i);
  std::vector<VertexId> best = combo;
  double best_value = value(combo);
  std::uint64_t evaluations = 1;
  // Lexicographic enumeration; strict improvement keeps the first optimum.
  while (true) {
    std::size_t i = m;
    while (i > 0 && combo[i - 1] == n - m + i - 1) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t j = i; j < m; ++j) combo[j] = combo[j - 1] + 1;
    const double v = value(combo);
    ++evaluations;
    if (v > best_value) {
      best_value = v;
      best = combo;
    }
  }

  SelectionResult result;
  result.method = SelectionMethod::brute_force;
  result.budget = m;
  result.selected = best;
  result.objective = best_value;
  result.evaluations = evaluations;
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

SelectionResult random_select(std::size_t n, std::size_t m, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  check_budget(n, m);
  SelectionResult result;
  result.method = SelectionMethod::random;
  result.budget = m;
  result.selected = sample_without_replacement(static_cast<std::uint32_t>(n),
                                               static_cast<std::uint32_t>(m), seed);
  result.seed = seed;
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

std::vector<std::vector<VertexId>> successor_lists(const DiffusionGraph& g) {
  std::vector<std::vector<VertexId>> lists(g.size());
  for (VertexId v = 0; v < g.size(); ++v) {
    for (const auto& edge : g.successors(v)) lists[v].push_back(edge.target);
  }
  return lists;
}

}  // namespace ideal
