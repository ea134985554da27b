#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ideal/embedding.hpp"

namespace ideal {

struct RetrievedPrompt {
  std::string id;
  double similarity;
};

// Exhaustive-scan index over the annotated examples. Entries keep their
// pool order, which is the tie-break order for equal similarities.
class RetrievalIndex {
 public:
  // `annotated` are row indices into `pool`; duplicates are rejected.
  RetrievalIndex(const EmbeddingSet& pool, std::span<const VertexId> annotated);

  std::size_t size() const noexcept { return vectors_.size(); }
  std::size_t dim() const noexcept { return vectors_.dim(); }
  const std::vector<std::string>& ids() const noexcept { return vectors_.ids(); }

  // The min(c, size) most similar entries, by descending cosine.
  std::vector<RetrievedPrompt> retrieve(std::span<const double> query, std::size_t c) const;

  // Uniform sample of min(c, size) entries without replacement.
  std::vector<std::string> random_retrieve(std::size_t c, std::uint64_t seed) const;

 private:
  EmbeddingSet vectors_;
};

}  // namespace ideal
