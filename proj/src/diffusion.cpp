#include "ideal/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "ideal/error.hpp"
#include "ideal/parallel.hpp"

namespace ideal {
namespace {

// Reusable per-thread buffers; `stamp[v] == epoch` marks v active.
struct CascadeScratch {
  std::vector<std::uint32_t> stamp;
  std::uint32_t epoch = 0;
  std::vector<VertexId> frontier;
  std::vector<VertexId> next;

  void reset(std::size_t n) {
    if (stamp.size() != n) {
      stamp.assign(n, 0);
      epoch = 0;
    }
    if (++epoch == std::numeric_limits<std::uint32_t>::max()) {
      std::fill(stamp.begin(), stamp.end(), 0);
      epoch = 1;
    }
  }
};

CascadeScratch& thread_scratch() {
  thread_local CascadeScratch scratch;
  return scratch;
}

// `seeds` must already be canonical. `on_activate(vertex, by)` sees every
// activation in order; `on_round_end()` follows each non-empty round.
template <typename OnActivate, typename OnRoundEnd>
std::size_t run_cascade(const DiffusionGraph& g, std::span<const VertexId> seeds,
                        RunStream& stream, CascadeScratch& s, OnActivate&& on_activate,
                        OnRoundEnd&& on_round_end) {
  s.reset(g.size());
  s.frontier.assign(seeds.begin(), seeds.end());
  for (VertexId v : seeds) s.stamp[v] = s.epoch;
  std::size_t active = seeds.size();
  while (!s.frontier.empty()) {
    s.next.clear();
    for (VertexId v : s.frontier) {
      const std::size_t base = g.first_edge(v);
      const auto successors = g.successors(v);
      for (std::size_t i = 0; i < successors.size(); ++i) {
        const VertexId u = successors[i].target;
        if (s.stamp[u] == s.epoch) continue;
        if (stream.fires(base + i, successors[i].probability)) {
          s.stamp[u] = s.epoch;
          s.next.push_back(u);
          on_activate(u, v);
        }
      }
    }
    if (s.next.empty()) break;
    active += s.next.size();
    on_round_end();
    std::sort(s.next.begin(), s.next.end());
    std::swap(s.frontier, s.next);
  }
  return active;
}

}  // namespace

std::size_t CascadeTrace::activated_count() const {
  std::size_t count = seed_set.size();
  for (const auto& round : rounds) count += round.size();
  return count;
}

std::vector<VertexId> canonical_seed_set(const DiffusionGraph& g, std::span<const VertexId> seeds) {
  if (seeds.empty()) fail_validation("seed set must be nonempty");
  std::vector<VertexId> sorted(seeds.begin(), seeds.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.back() >= g.size()) {
    fail_validation("seed vertex " + std::to_string(sorted.back()) + " out of range for n=" +
                    std::to_string(g.size()));
  }
  return sorted;
}

CascadeTrace simulate_cascade(const DiffusionGraph& g, std::span<const VertexId> seeds,
                              RunStream& stream) {
  CascadeTrace trace;
  trace.seed_set = canonical_seed_set(g, seeds);
  std::vector<Activation> round;
  run_cascade(
      g, trace.seed_set, stream, thread_scratch(),
      [&](VertexId u, VertexId by) { round.push_back({u, by}); },
      [&] {
        trace.rounds.push_back(std::move(round));
        round.clear();
      });
  return trace;
}

std::size_t cascade_size(const DiffusionGraph& g, std::span<const VertexId> seeds,
                         RunStream& stream) {
  const auto canonical = canonical_seed_set(g, seeds);
  return run_cascade(g, canonical, stream, thread_scratch(), [](VertexId, VertexId) {}, [] {});
}

InfluenceEstimate estimate_influence(const DiffusionGraph& g, std::span<const VertexId> seeds,
                                     std::uint32_t reps, std::uint64_t seed,
                                     const InfluenceOptions& options) {
  if (reps < 1) fail_validation("reps must be at least 1");
  const auto canonical = canonical_seed_set(g, seeds);
  const std::uint64_t set_hash = subset_hash(canonical);

  std::vector<std::uint32_t> counts(reps);
  auto run = [&](std::size_t r) {
    RunStream stream = options.mode == CoinMode::fresh ? RunStream::fresh(seed, set_hash, r)
                                                       : RunStream::common(seed, r);
    counts[r] = static_cast<std::uint32_t>(run_cascade(
        g, canonical, stream, thread_scratch(), [](VertexId, VertexId) {}, [] {}));
  };
  if (options.threads == 1) {
    for (std::size_t r = 0; r < reps; ++r) run(r);
  } else {
    parallel_for(reps, options.threads, run);
  }

  // Integer accumulation keeps the aggregate independent of summation order.
  std::uint64_t total = 0;
  unsigned __int128 squares = 0;
  for (std::uint32_t c : counts) {
    total += c;
    squares += static_cast<unsigned __int128>(c) * c;
  }
  InfluenceEstimate est;
  est.reps = reps;
  est.seed = seed;
  est.subset_size = canonical.size();
  est.total = total;
  est.mean = static_cast<double>(total) / reps;
  if (reps > 1) {
    const unsigned __int128 scaled =
        static_cast<unsigned __int128>(reps) * squares -
        static_cast<unsigned __int128>(total) * total;
    const double variance =
        static_cast<double>(scaled) / (static_cast<double>(reps) * (reps - 1.0));
    est.std_error = std::sqrt(variance / reps);
  }
  return est;
}

nlohmann::ordered_json trace_to_json(const CascadeTrace& trace) {
  nlohmann::ordered_json doc;
  doc["seed_set"] = trace.seed_set;
  auto rounds = nlohmann::ordered_json::array();
  for (const auto& round : trace.rounds) {
    auto entries = nlohmann::ordered_json::array();
    for (const auto& a : round) {
      entries.push_back({{"vertex", a.vertex}, {"activated_by", a.activated_by}});
    }
    rounds.push_back(std::move(entries));
  }
  doc["rounds"] = std::move(rounds);
  return doc;
}

CascadeTrace trace_from_json(const nlohmann::json& doc) {
  CascadeTrace trace;
  try {
    trace.seed_set = doc.at("seed_set").get<std::vector<VertexId>>();
    for (const auto& round : doc.at("rounds")) {
      std::vector<Activation> entries;
      for (const auto& a : round) {
        entries.push_back({a.at("vertex").get<VertexId>(), a.at("activated_by").get<VertexId>()});
      }
      trace.rounds.push_back(std::move(entries));
    }
  } catch (const nlohmann::json::exception& e) {
    fail_validation(std::string("malformed cascade trace: ") + e.what());
  }
  return trace;
}

void export_cascade_trace(const CascadeTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail_io("cannot open '" + path.string() + "' for writing");
  out << trace_to_json(trace).dump(2) << '\n';
  if (!out) fail_io("write failed for '" + path.string() + "'");
}

CascadeTrace load_cascade_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open '" + path.string() + "' for reading");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail_validation(std::string("malformed cascade trace: ") + e.what());
  }
  return trace_from_json(doc);
}

}  // namespace ideal
