#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ideal {

using VertexId = std::uint32_t;

enum class EmbeddingFormat { jsonl, csv, raw_f32 };

EmbeddingFormat parse_embedding_format(std::string_view name);
std::string_view format_name(EmbeddingFormat format);
// Guesses the format from the file extension (.jsonl, .csv, .f32/.bin).
EmbeddingFormat format_from_path(const std::filesystem::path& path);

// The unlabeled pool: n rows of fixed dimension, id-aligned, row order is the
// canonical vertex order used by every downstream module. Immutable once
// built; all rows are finite and nonzero, ids are unique.
class EmbeddingSet {
 public:
  // Validates and takes ownership. `values` is row-major with n * dim entries.
  static EmbeddingSet create(std::vector<std::string> ids,
                             std::vector<double> values, std::size_t dim);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  bool normalized() const noexcept { return normalized_; }

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::string& id(VertexId v) const { return ids_.at(v); }
  std::span<const double> row(VertexId v) const {
    return {values_.data() + static_cast<std::size_t>(v) * dim_, dim_};
  }
  std::span<const double> values() const noexcept { return values_; }

  // Row index of an id; throws a validation error if absent.
  VertexId index_of(std::string_view id) const;

  // 64-bit FNV-1a over ids, dimension and the bit patterns of all values.
  std::uint64_t content_hash() const;

  // Rows restricted to `rows`, in the given order.
  EmbeddingSet subset(std::span<const VertexId> rows) const;

 private:
  EmbeddingSet() = default;
  friend EmbeddingSet normalize(const EmbeddingSet& e);

  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::size_t dim_ = 0;
  bool normalized_ = false;
};

EmbeddingSet load_embeddings(const std::filesystem::path& path,
                             EmbeddingFormat format);
void save_embeddings(const EmbeddingSet& e, const std::filesystem::path& path,
                     EmbeddingFormat format);

// Scales every row to unit L2 norm and sets the normalized flag. Rows whose
// norm is already exactly 1 are left untouched; a set that is already
// normalized is returned unchanged.
EmbeddingSet normalize(const EmbeddingSet& e);

double l2_norm(std::span<const double> v);

// Cosine similarity clamped to [-1, 1]. Throws on a zero vector or a
// dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

// Cosine with precomputed norms; no validation, used in inner loops.
double cosine_unchecked(std::span<const double> u, double norm_u,
                        std::span<const double> v, double norm_v);

}  // namespace ideal
