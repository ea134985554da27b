#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ideal/graph.hpp"
#include "ideal/rng.hpp"

namespace ideal {

inline constexpr std::uint32_t kDefaultReps = 10;

// How run r of an influence evaluation derives its coins.
//   fresh:  key = (seed, subset hash, r); every candidate set sees its own
//           independent coins.
//   common: key = (seed, r); every set sees the same live-edge sample in run
//           r (common random numbers), which keeps the estimate exactly
//           monotone and submodular.
enum class CoinMode { fresh, common };

// Counter-based coin source for one cascade run. The uniform for edge e is a
// pure function of (key, e), so the outcome never depends on evaluation
// order or thread schedule, and each edge has exactly one coin per run.
class RunStream {
 public:
  explicit RunStream(std::uint64_t key) noexcept : key_(key) {}

  static RunStream fresh(std::uint64_t seed, std::uint64_t set_hash, std::uint64_t rep) noexcept {
    return RunStream(mix_keys(mix_keys(seed, set_hash), rep));
  }
  static RunStream common(std::uint64_t seed, std::uint64_t rep) noexcept {
    return RunStream(mix_keys(mix_keys(seed, 0x636f6d6d6f6eULL), rep));
  }

  // Activation test for edge `edge_id` with probability p (tau <= p).
  // p = 0 never fires and p = 1 always fires without consuming a draw.
  bool fires(std::size_t edge_id, double p) noexcept {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    ++draws_;
    return unit_interval(mix_keys(key_, edge_id)) <= p;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::size_t draws() const noexcept { return draws_; }

 private:
  std::uint64_t key_;
  std::size_t draws_ = 0;
};

struct Activation {
  VertexId vertex;
  VertexId activated_by;

  friend bool operator==(const Activation&, const Activation&) = default;
};

// Step-by-step record of one cascade: seeds, then one entry per round
// listing newly activated vertices and the frontier vertex that fired them.
struct CascadeTrace {
  std::vector<VertexId> seed_set;
  std::vector<std::vector<Activation>> rounds;

  std::size_t activated_count() const;
  friend bool operator==(const CascadeTrace&, const CascadeTrace&) = default;
};

struct InfluenceEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint32_t reps = 0;
  std::uint64_t seed = 0;
  std::size_t subset_size = 0;
  // Sum of activation counts over all runs; exact, used for comparisons.
  std::uint64_t total = 0;
};

struct InfluenceOptions {
  CoinMode mode = CoinMode::fresh;
  unsigned threads = 1;
};

// Sorted, deduplicated copy of `seeds`; throws on an empty set or an index
// outside the graph.
std::vector<VertexId> canonical_seed_set(const DiffusionGraph& g, std::span<const VertexId> seeds);

// One independent-cascade run. The frontier starts at the seeds; every
// frontier vertex, in ascending index order, tosses one coin for each
// successor that is not yet active; the vertices it activates form the next
// frontier. Stops when a round activates nothing.
CascadeTrace simulate_cascade(const DiffusionGraph& g, std::span<const VertexId> seeds,
                              RunStream& stream);

// Number of activated vertices (seeds included) of a single run; same
// process as simulate_cascade without building the trace.
std::size_t cascade_size(const DiffusionGraph& g, std::span<const VertexId> seeds,
                         RunStream& stream);

// Monte-Carlo estimate of f(S) = |S| + newly activated, averaged over `reps`
// runs. Deterministic in (g, seeds, reps, seed, mode) for any thread count.
InfluenceEstimate estimate_influence(const DiffusionGraph& g, std::span<const VertexId> seeds,
                                     std::uint32_t reps = kDefaultReps, std::uint64_t seed = 0,
                                     const InfluenceOptions& options = {});

nlohmann::ordered_json trace_to_json(const CascadeTrace& trace);
CascadeTrace trace_from_json(const nlohmann::json& doc);
void export_cascade_trace(const CascadeTrace& trace, const std::filesystem::path& path);
CascadeTrace load_cascade_trace(const std::filesystem::path& path);

}  // namespace ideal
