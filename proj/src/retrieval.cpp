#include "ideal/retrieval.hpp"

#include <algorithm>
#include <numeric>

#include "ideal/error.hpp"
#include "ideal/rng.hpp"

namespace ideal {
namespace {

std::vector<VertexId> pool_ordered(const EmbeddingSet& pool, std::span<const VertexId> annotated) {
  if (annotated.empty()) fail_validation("retrieval index needs at least one annotated example");
  std::vector<VertexId> rows(annotated.begin(), annotated.end());
  std::sort(rows.begin(), rows.end());
  if (std::adjacent_find(rows.begin(), rows.end()) != rows.end()) {
    fail_validation("annotated set contains duplicates");
  }
  if (rows.back() >= pool.size()) fail_validation("annotated row out of range");
  return rows;
}

}  // namespace

RetrievalIndex::RetrievalIndex(const EmbeddingSet& pool, std::span<const VertexId> annotated)
    : vectors_(normalize(pool.subset(pool_ordered(pool, annotated)))) {}

std::vector<RetrievedPrompt> RetrievalIndex::retrieve(std::span<const double> query,
                                                      std::size_t c) const {
  if (c < 1) fail_usage("number of prompts must be at least 1");
  if (query.size() != dim()) {
    fail_validation("query dimension " + std::to_string(query.size()) +
                    " does not match index dimension " + std::to_string(dim()));
  }
  const double query_norm = l2_norm(query);
  if (query_norm == 0.0) fail_validation("query vector is all zeros");

  struct Scored {
    std::size_t entry;
    double similarity;
  };
  std::vector<Scored> scored(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const auto row = vectors_.row(static_cast<VertexId>(i));
    scored[i] = {i, cosine_unchecked(query, query_norm, row, l2_norm(row))};
  }
  const std::size_t keep = std::min(c, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), [](const Scored& a, const Scored& b) {
                      if (a.similarity != b.similarity) return a.similarity > b.similarity;
                      return a.entry < b.entry;
                    });
  std::vector<RetrievedPrompt> result;
  result.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    result.push_back({vectors_.id(static_cast<VertexId>(scored[i].entry)), scored[i].similarity});
  }
  return result;
}

std::vector<std::string> RetrievalIndex::random_retrieve(std::size_t c, std::uint64_t seed) const {
  if (c < 1) fail_usage("number of prompts must be at least 1");
  const auto picks = sample_without_replacement(static_cast<std::uint32_t>(size()),
                                                static_cast<std::uint32_t>(std::min(c, size())),
                                                seed);
  std::vector<std::string> result;
  result.reserve(picks.size());
  for (auto p : picks) result.push_back(vectors_.id(p));
  return result;
}

}  // namespace ideal
