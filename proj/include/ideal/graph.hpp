#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ideal/embedding.hpp"

namespace ideal {

inline constexpr std::size_t kDefaultNeighbors = 10;

struct Edge {
  VertexId target;
  double probability;
};

struct EdgeSpec {
  VertexId source;
  VertexId target;
  double probability;
};

// Directed graph with activation probabilities, stored as compressed
// successor lists. Each vertex's successors are ordered by descending
// probability, then ascending target. Edge ids are positions in that flat
// order and are what the cascade coins are keyed on.
class DiffusionGraph {
 public:
  // Generic constructor used by the k-NN builder, the graph-file reader and
  // the randomized test generators. `k` of 0 means "max out-degree".
  // Rejects self-edges, duplicate edges, out-of-range vertices and
  // probabilities outside [0, 1].
  static DiffusionGraph from_edges(std::size_t n, std::vector<EdgeSpec> edges, std::size_t k = 0,
                                   std::uint64_t built_from = 0);

  std::size_t size() const noexcept { return offsets_.size() - 1; }
  std::size_t k() const noexcept { return k_; }
  std::uint64_t built_from() const noexcept { return built_from_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  // Edges with 0 < p < 1; the others are deterministic.
  std::size_t uncertain_edge_count() const noexcept;

  std::span<const Edge> successors(VertexId v) const {
    return {edges_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t first_edge(VertexId v) const { return offsets_[v]; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  friend bool operator==(const DiffusionGraph& a, const DiffusionGraph& b) {
    return a.k_ == b.k_ && a.built_from_ == b.built_from_ && a.offsets_ == b.offsets_ &&
           a.edges_.size() == b.edges_.size() &&
           std::equal(a.edges_.begin(), a.edges_.end(), b.edges_.begin(),
                      [](const Edge& x, const Edge& y) {
                        return x.target == y.target && x.probability == y.probability;
                      });
  }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<Edge> edges_;
  std::size_t k_ = 0;
  std::uint64_t built_from_ = 0;
};

// The min(k, n-1) vertices u != v with the largest cosine to v, ties by
// ascending index, in that order.
std::vector<VertexId> knn_successors(const EmbeddingSet& e, VertexId v, std::size_t k);

// k-NN lists for every vertex (exact scan), parallel over query vertices.
std::vector<std::vector<VertexId>> knn_lists(const EmbeddingSet& e, std::size_t k,
                                             unsigned threads = 0);

// Connects every vertex to its k nearest successors with weight
// max(cos, 0) / sum of max(cos, 0) over the successors; a vertex whose
// successors all have nonpositive similarity keeps its edges at p = 0.
DiffusionGraph build_graph(const EmbeddingSet& e, std::size_t k = kDefaultNeighbors,
                           unsigned threads = 0);

// IDEALGRAPH v1 text format.
std::string serialize_graph(const DiffusionGraph& g);
void save_graph(const DiffusionGraph& g, const std::filesystem::path& path);
DiffusionGraph parse_graph(const std::string& text);
DiffusionGraph load_graph(const std::filesystem::path& path);

std::string hash_hex(std::uint64_t hash);

}  // namespace ideal
