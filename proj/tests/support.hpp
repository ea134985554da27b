#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ideal/embedding.hpp"
#include "ideal/graph.hpp"
#include "ideal/rng.hpp"

namespace ideal::testing {

// Scratch directory removed when the object goes out of scope.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ideal_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path file(const std::string& name) const { return path_ / name; }
  std::string str(const std::string& name) const { return file(name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// n points of dimension d with standard normal coordinates and ids "v0"...
inline EmbeddingSet gaussian_embeddings(std::size_t n, std::size_t d, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::string> ids;
  std::vector<double> values;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("v" + std::to_string(i));
    for (std::size_t j = 0; j < d; ++j) values.push_back(rng.normal());
  }
  return EmbeddingSet::create(std::move(ids), std::move(values), d);
}

inline DiffusionGraph uniform_graph(std::size_t n, double p) {
  std::vector<EdgeSpec> edges;
  for (VertexId v = 0; v < n; ++v) {
    for (VertexId u = 0; u < n; ++u) {
      if (u != v) edges.push_back({v, u, p});
    }
  }
  return DiffusionGraph::from_edges(n, std::move(edges));
}

}  // namespace ideal::testing
