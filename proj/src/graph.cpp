#include "ideal/graph.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ideal/error.hpp"
#include "ideal/parallel.hpp"

namespace ideal {
namespace {

struct Neighbor {
  VertexId index;
  double similarity;
};

bool closer(const Neighbor& a, const Neighbor& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.index < b.index;
}

std::vector<Neighbor> nearest(const EmbeddingSet& e, std::span<const double> norms, VertexId v,
                              std::size_t k) {
  const std::size_t n = e.size();
  std::vector<Neighbor> all;
  all.reserve(n - 1);
  const auto query = e.row(v);
  for (VertexId u = 0; u < n; ++u) {
    if (u == v) continue;
    all.push_back({u, cosine_unchecked(query, norms[v], e.row(u), norms[u])});
  }
  const std::size_t keep = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    closer);
  all.resize(keep);
  return all;
}

std::vector<double> row_norms(const EmbeddingSet& e) {
  std::vector<double> norms(e.size());
  for (VertexId v = 0; v < e.size(); ++v) norms[v] = l2_norm(e.row(v));
  return norms;
}

}  // namespace

std::string hash_hex(std::uint64_t hash) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016" PRIx64, hash);
  return buffer;
}

DiffusionGraph DiffusionGraph::from_edges(std::size_t n, std::vector<EdgeSpec> edges,
                                          std::size_t k, std::uint64_t built_from) {
  if (n == 0) fail_validation("graph needs at least one vertex");
  for (const auto& edge : edges) {
    if (edge.source >= n || edge.target >= n) {
      fail_validation("edge " + std::to_string(edge.source) + "->" + std::to_string(edge.target) +
                      " out of range for n=" + std::to_string(n));
    }
    if (edge.source == edge.target) {
      fail_validation("self-edge on vertex " + std::to_string(edge.source));
    }
    if (!(edge.probability >= 0.0 && edge.probability <= 1.0)) {
      fail_validation("edge " + std::to_string(edge.source) + "->" +
                      std::to_string(edge.target) + " has probability outside [0, 1]");
    }
  }
  std::sort(edges.begin(), edges.end(), [](const EdgeSpec& a, const EdgeSpec& b) {
    if (a.source != b.source) return a.source < b.source;
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.target < b.target;
  });

  DiffusionGraph g;
  g.offsets_.assign(n + 1, 0);
  g.edges_.reserve(edges.size());
  std::size_t max_degree = 0;
  for (std::size_t i = 0; i < edges.size();) {
    const VertexId source = edges[i].source;
    std::size_t j = i;
    for (; j < edges.size() && edges[j].source == source; ++j) {
      for (std::size_t prior = i; prior < j; ++prior) {
        if (edges[prior].target == edges[j].target) {
          fail_validation("duplicate edge " + std::to_string(source) + "->" +
                          std::to_string(edges[j].target));
        }
      }
      g.edges_.push_back({edges[j].target, edges[j].probability});
    }
    g.offsets_[source + 1] = j - i;
    max_degree = std::max(max_degree, j - i);
    i = j;
  }
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] += g.offsets_[v];
  if (k != 0 && max_degree > k) {
    fail_validation("out-degree " + std::to_string(max_degree) + " exceeds k=" +
                    std::to_string(k));
  }
  g.k_ = k != 0 ? k : max_degree;
  g.built_from_ = built_from;
  return g;
}

std::size_t DiffusionGraph::uncertain_edge_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) {
    return e.probability > 0.0 && e.probability < 1.0;
  }));
}

std::vector<VertexId> knn_successors(const EmbeddingSet& e, VertexId v, std::size_t k) {
  if (v >= e.size()) {
    fail_validation("vertex " + std::to_string(v) + " out of range for n=" +
                    std::to_string(e.size()));
  }
  if (k < 1) fail_validation("k must be at least 1");
  const auto norms = row_norms(e);
  std::vector<VertexId> result;
  for (const auto& nb : nearest(e, norms, v, k)) result.push_back(nb.index);
  return result;
}

std::vector<std::vector<VertexId>> knn_lists(const EmbeddingSet& e, std::size_t k,
                                             unsigned threads) {
  if (k < 1) fail_validation("k must be at least 1");
  const auto norms = row_norms(e);
  std::vector<std::vector<VertexId>> lists(e.size());
  parallel_for(e.size(), threads, [&](std::size_t v) {
    for (const auto& nb : nearest(e, norms, static_cast<VertexId>(v), k)) {
      lists[v].push_back(nb.index);
    }
  });
  return lists;
}

DiffusionGraph build_graph(const EmbeddingSet& e, std::size_t k, unsigned threads) {
  const std::size_t n = e.size();
  if (n < 2) fail_validation("graph construction needs at least 2 embeddings, got " +
                             std::to_string(n));
  if (k < 1) fail_validation("k must be at least 1");
  const auto norms = row_norms(e);
  std::vector<std::vector<EdgeSpec>> per_vertex(n);
  parallel_for(n, threads, [&](std::size_t index) {
    const auto v = static_cast<VertexId>(index);
    auto neighbors = nearest(e, norms, v, k);
    double total = 0.0;
    for (auto& nb : neighbors) {
      nb.similarity = std::max(nb.similarity, 0.0);
      total += nb.similarity;
    }
    auto& out = per_vertex[index];
    out.reserve(neighbors.size());
    for (const auto& nb : neighbors) {
      out.push_back({v, nb.index, total > 0.0 ? nb.similarity / total : 0.0});
    }
  });
  std::vector<EdgeSpec> edges;
  edges.reserve(n * std::min(k, n - 1));
  for (auto& list : per_vertex) edges.insert(edges.end(), list.begin(), list.end());
  return DiffusionGraph::from_edges(n, std::move(edges), k, e.content_hash());
}

std::string serialize_graph(const DiffusionGraph& g) {
  std::string out = "IDEALGRAPH v1 n=" + std::to_string(g.size()) +
                    " k=" + std::to_string(g.k()) + " hash=" + hash_hex(g.built_from()) + "\n";
  char line[96];
  for (VertexId v = 0; v < g.size(); ++v) {
    for (const auto& edge : g.successors(v)) {
      std::snprintf(line, sizeof line, "%u\t%u\t%.17g\n", v, edge.target, edge.probability);
      out += line;
    }
  }
  return out;
}

void save_graph(const DiffusionGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_io("cannot open '" + path.string() + "' for writing");
  out << serialize_graph(g);
  if (!out) fail_io("write failed for '" + path.string() + "'");
}

DiffusionGraph parse_graph(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header)) fail_validation("empty graph file");
  unsigned long long n = 0, k = 0;
  char hash_text[17] = {};
  if (std::sscanf(header.c_str(), "IDEALGRAPH v1 n=%llu k=%llu hash=%16[0-9a-f]", &n, &k,
                  hash_text) != 3) {
    fail_validation("malformed graph header '" + header + "'");
  }
  const std::uint64_t hash = std::strtoull(hash_text, nullptr, 16);
  std::vector<EdgeSpec> edges;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    unsigned long long src = 0, dst = 0;
    double p = 0.0;
    int consumed = 0;
    if (std::sscanf(line.c_str(), "%llu\t%llu\t%lf%n", &src, &dst, &p, &consumed) != 3 ||
        static_cast<std::size_t>(consumed) != line.size()) {
      fail_validation("malformed edge at line " + std::to_string(line_no));
    }
    if (src >= n || dst >= n) {
      fail_validation("edge at line " + std::to_string(line_no) + " references a vertex >= n");
    }
    edges.push_back({static_cast<VertexId>(src), static_cast<VertexId>(dst), p});
  }
  return DiffusionGraph::from_edges(n, std::move(edges), k, hash);
}

DiffusionGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_graph(buffer.str());
}

}  // namespace ideal
