#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ideal/graph.hpp"

namespace ideal {

// Enumeration is over 2^u live-edge configurations, u = uncertain edges.
inline constexpr std::size_t kMaxUncertainEdges = 20;
// Largest graph the all-subsets table accepts.
inline constexpr std::size_t kMaxTableVertices = 20;

using SubsetMask = std::uint32_t;

// Expected number of vertices reachable from `seeds` (seeds included) when
// every edge is independently live with its probability. Throws when the
// graph has more than kMaxUncertainEdges edges with 0 < p < 1.
double exact_influence(const DiffusionGraph& g, std::span<const VertexId> seeds);

// Exact influence of every subset of a small graph, indexed by bitmask
// (bit v set <=> v in S). Built in one pass over live-edge configurations
// via per-vertex reachability masks; independent of exact_influence.
class InfluenceTable {
 public:
  explicit InfluenceTable(const DiffusionGraph& g);

  std::size_t size() const noexcept { return n_; }
  double operator[](SubsetMask set) const { return values_[set]; }
  double value(std::span<const VertexId> seeds) const;
  SubsetMask full() const noexcept { return static_cast<SubsetMask>((1ULL << n_) - 1); }

 private:
  std::size_t n_;
  std::vector<double> values_;
};

SubsetMask to_mask(std::span<const VertexId> vertices);
std::vector<VertexId> from_mask(SubsetMask mask);

}  // namespace ideal
