#include "ideal/exact.hpp"

#include <bit>

#include "ideal/diffusion.hpp"
#include "ideal/error.hpp"

namespace ideal {
namespace {

std::vector<std::size_t> uncertain_edge_ids(const DiffusionGraph& g) {
  std::vector<std::size_t> ids;
  const auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].probability > 0.0 && edges[e].probability < 1.0) ids.push_back(e);
  }
  if (ids.size() > kMaxUncertainEdges) {
    fail_validation("graph has " + std::to_string(ids.size()) +
                    " uncertain edges; exact enumeration allows at most " +
                    std::to_string(kMaxUncertainEdges));
  }
  return ids;
}

// Probability of each configuration (bit i of c <=> uncertain edge i live)
// and the per-edge liveness it implies.
double configuration_probability(const DiffusionGraph& g, std::span<const std::size_t> uncertain,
                                 std::uint64_t config, std::vector<char>& live) {
  const auto edges = g.edges();
  double prob = 1.0;
  for (std::size_t i = 0; i < uncertain.size(); ++i) {
    const double p = edges[uncertain[i]].probability;
    const bool on = (config >> i) & 1U;
    live[uncertain[i]] = on;
    prob *= on ? p : 1.0 - p;
  }
  return prob;
}

std::vector<char> certain_liveness(const DiffusionGraph& g) {
  std::vector<char> live(g.edge_count(), 0);
  const auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) live[e] = edges[e].probability >= 1.0;
  return live;
}

}  // namespace

double exact_influence(const DiffusionGraph& g, std::span<const VertexId> seeds) {
  const auto start = canonical_seed_set(g, seeds);
  const auto uncertain = uncertain_edge_ids(g);
  auto live = certain_liveness(g);

  std::vector<char> reached(g.size());
  std::vector<VertexId> stack;
  double expected = 0.0;
  const std::uint64_t configs = std::uint64_t{1} << uncertain.size();
  for (std::uint64_t c = 0; c < configs; ++c) {
    const double prob = configuration_probability(g, uncertain, c, live);
    if (prob == 0.0) continue;
    std::fill(reached.begin(), reached.end(), 0);
    stack.assign(start.begin(), start.end());
    for (VertexId v : start) reached[v] = 1;
    std::size_t count = start.size();
    while (!stack.empty()) {
      const VertexId v = stack.back();
      stack.pop_back();
      const auto successors = g.successors(v);
      for (std::size_t i = 0; i < successors.size(); ++i) {
        const VertexId u = successors[i].target;
        if (!live[g.first_edge(v) + i] || reached[u]) continue;
        reached[u] = 1;
        ++count;
        stack.push_back(u);
      }
    }
    expected += prob * static_cast<double>(count);
  }
  return expected;
}

InfluenceTable::InfluenceTable(const DiffusionGraph& g) : n_(g.size()) {
  if (n_ > kMaxTableVertices) {
    fail_validation("influence table supports at most " + std::to_string(kMaxTableVertices) +
                    " vertices, graph has " + std::to_string(n_));
  }
  const auto uncertain = uncertain_edge_ids(g);
  auto live = certain_liveness(g);
  const std::size_t subsets = std::size_t{1} << n_;
  values_.assign(subsets, 0.0);

  std::vector<SubsetMask> adjacency(n_);
  std::vector<SubsetMask> reach(n_);
  std::vector<SubsetMask> reach_of_set(subsets, 0);
  const std::uint64_t configs = std::uint64_t{1} << uncertain.size();
  for (std::uint64_t c = 0; c < configs; ++c) {
    const double prob = configuration_probability(g, uncertain, c, live);
    if (prob == 0.0) continue;
    for (VertexId v = 0; v < n_; ++v) {
      SubsetMask mask = 0;
      const auto successors = g.successors(v);
      for (std::size_t i = 0; i < successors.size(); ++i) {
        if (live[g.first_edge(v) + i]) mask |= SubsetMask{1} << successors[i].target;
      }
      adjacency[v] = mask;
    }
    // Reachability closure from each single vertex.
    for (VertexId v = 0; v < n_; ++v) {
      SubsetMask seen = SubsetMask{1} << v;
      SubsetMask frontier = seen;
      while (frontier != 0) {
        SubsetMask next = 0;
        for (SubsetMask f = frontier; f != 0; f &= f - 1) {
          next |= adjacency[std::countr_zero(f)];
        }
        frontier = next & ~seen;
        seen |= next;
      }
      reach[v] = seen;
    }
    // reach(S) = reach(S minus lowest vertex) | reach(lowest vertex).
    for (std::size_t set = 1; set < subsets; ++set) {
      const auto low = static_cast<unsigned>(std::countr_zero(set));
      reach_of_set[set] = reach_of_set[set & (set - 1)] | reach[low];
      values_[set] += prob * std::popcount(reach_of_set[set]);
    }
  }
}

double InfluenceTable::value(std::span<const VertexId> seeds) const {
  for (VertexId v : seeds) {
    if (v >= n_) fail_validation("vertex " + std::to_string(v) + " out of range");
  }
  return values_[to_mask(seeds)];
}

SubsetMask to_mask(std::span<const VertexId> vertices) {
  SubsetMask mask = 0;
  for (VertexId v : vertices) {
    if (v >= 32) fail_validation("vertex " + std::to_string(v) + " does not fit a subset mask");
    mask |= SubsetMask{1} << v;
  }
  return mask;
}

std::vector<VertexId> from_mask(SubsetMask mask) {
  std::vector<VertexId> vertices;
  for (; mask != 0; mask &= mask - 1) vertices.push_back(static_cast<VertexId>(std::countr_zero(mask)));
  return vertices;
}

}  // namespace ideal
