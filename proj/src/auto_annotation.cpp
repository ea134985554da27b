#include "ideal/auto_annotation.hpp"

#include <algorithm>
#include <limits>

#include "ideal/diffusion.hpp"
#include "ideal/error.hpp"
#include "ideal/rng.hpp"

namespace ideal {
namespace {

class Similarity {
 public:
  explicit Similarity(const EmbeddingSet& e) : e_(e), norms_(e.size()) {
    for (VertexId v = 0; v < e.size(); ++v) norms_[v] = l2_norm(e.row(v));
  }

  double operator()(VertexId a, VertexId b) const {
    return cosine_unchecked(e_.row(a), norms_[a], e_.row(b), norms_[b]);
  }

 private:
  const EmbeddingSet& e_;
  std::vector<double> norms_;
};

std::vector<VertexId> most_similar(const Similarity& sim, VertexId target,
                                   std::span<const VertexId> annotated, std::size_t c) {
  std::vector<std::pair<double, VertexId>> scored;
  scored.reserve(annotated.size());
  for (VertexId a : annotated) scored.emplace_back(sim(target, a), a);
  const std::size_t keep = std::min(c, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), [](const auto& x, const auto& y) {
                      if (x.first != y.first) return x.first > y.first;
                      return x.second < y.second;
                    });
  std::vector<VertexId> sources;
  sources.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) sources.push_back(scored[i].second);
  return sources;
}

}  // namespace

std::size_t AnnotationSchedule::scheduled_count() const {
  std::size_t count = manual.size();
  for (const auto& round : rounds) count += round.size();
  return count;
}

std::size_t AnnotationSchedule::fallback_count() const {
  std::size_t count = 0;
  for (const auto& round : rounds) {
    for (const auto& record : round) count += record.kind == ActivationKind::fallback;
  }
  return count;
}

AnnotationSchedule diffusion_schedule(const DiffusionGraph& g, const EmbeddingSet& e,
                                      std::span<const VertexId> manual, std::size_t c,
                                      std::uint64_t seed) {
  if (c < 1) fail_usage("prompts per target must be at least 1");
  if (e.size() != g.size()) {
    fail_validation("graph has " + std::to_string(g.size()) + " vertices but embeddings have " +
                    std::to_string(e.size()) + " rows");
  }
  const std::size_t n = g.size();
  AnnotationSchedule schedule;
  schedule.manual = canonical_seed_set(g, manual);

  const Similarity sim(e);
  std::vector<char> annotated(n, 0);
  std::vector<VertexId> order;  // annotation order
  order.reserve(n);
  std::vector<double> closest(n, -std::numeric_limits<double>::infinity());
  auto mark_annotated = [&](VertexId v) {
    annotated[v] = 1;
    order.push_back(v);
    for (VertexId u = 0; u < n; ++u) {
      if (!annotated[u]) closest[u] = std::max(closest[u], sim(u, v));
    }
  };
  for (VertexId v : schedule.manual) mark_annotated(v);

  RunStream stream(mix_keys(seed, subset_hash(schedule.manual)));
  std::vector<VertexId> frontier = schedule.manual;
  std::vector<VertexId> fresh;
  std::vector<char> pending(n, 0);
  while (order.size() < n) {
    if (frontier.empty()) {
      VertexId pick = 0;
      double best = -std::numeric_limits<double>::infinity();
      bool found = false;
      for (VertexId u = 0; u < n; ++u) {
        if (annotated[u]) continue;
        if (!found || closest[u] > best) {
          pick = u;
          best = closest[u];
          found = true;
        }
      }
      schedule.rounds.push_back(
          {{pick, most_similar(sim, pick, order, c), ActivationKind::fallback}});
      mark_annotated(pick);
      frontier = {pick};
      continue;
    }

    fresh.clear();
    for (VertexId v : frontier) {
      const std::size_t base = g.first_edge(v);
      const auto successors = g.successors(v);
      for (std::size_t i = 0; i < successors.size(); ++i) {
        const VertexId u = successors[i].target;
        if (annotated[u] || pending[u]) continue;
        if (stream.fires(base + i, successors[i].probability)) {
          pending[u] = 1;
          fresh.push_back(u);
        }
      }
    }
    if (!fresh.empty()) {
      std::vector<ScheduledAnnotation> round;
      round.reserve(fresh.size());
      for (VertexId u : fresh) {
        round.push_back({u, most_similar(sim, u, order, c), ActivationKind::cascade});
      }
      for (VertexId u : fresh) {
        pending[u] = 0;
        mark_annotated(u);
      }
      schedule.rounds.push_back(std::move(round));
    }
    std::sort(fresh.begin(), fresh.end());
    frontier = fresh;
  }
  return schedule;
}

std::string validate_schedule(const AnnotationSchedule& schedule, std::size_t n) {
  if (schedule.manual.empty()) return "manual set is empty";
  // round_of[v]: 0 for manual, r + 1 for rounds[r], -1 if unscheduled.
  std::vector<long> round_of(n, -1);
  auto place = [&](VertexId v, long round) -> std::string {
    if (v >= n) return "vertex " + std::to_string(v) + " out of range";
    if (round_of[v] != -1) return "vertex " + std::to_string(v) + " scheduled twice";
    round_of[v] = round;
    return {};
  };
  for (VertexId v : schedule.manual) {
    if (auto err = place(v, 0); !err.empty()) return err;
  }
  for (std::size_t r = 0; r < schedule.rounds.size(); ++r) {
    for (const auto& record : schedule.rounds[r]) {
      if (auto err = place(record.target, static_cast<long>(r) + 1); !err.empty()) return err;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (round_of[v] == -1) return "vertex " + std::to_string(v) + " never scheduled";
  }
  for (std::size_t r = 0; r < schedule.rounds.size(); ++r) {
    for (const auto& record : schedule.rounds[r]) {
      if (record.prompt_sources.empty()) {
        return "target " + std::to_string(record.target) + " has no prompt sources";
      }
      for (VertexId s : record.prompt_sources) {
        if (s >= n || round_of[s] > static_cast<long>(r)) {
          return "target " + std::to_string(record.target) + " uses prompt source " +
                 std::to_string(s) + " that is not annotated earlier";
        }
      }
    }
  }
  return {};
}

nlohmann::ordered_json schedule_to_json(const AnnotationSchedule& schedule,
                                        const std::vector<std::string>& ids) {
  auto id_list = [&](std::span<const VertexId> vs) {
    auto list = nlohmann::ordered_json::array();
    for (VertexId v : vs) list.push_back(ids.at(v));
    return list;
  };
  nlohmann::ordered_json doc;
  doc["manual"] = id_list(schedule.manual);
  auto rounds = nlohmann::ordered_json::array();
  for (const auto& round : schedule.rounds) {
    auto records = nlohmann::ordered_json::array();
    for (const auto& record : round) {
      nlohmann::ordered_json entry;
      entry["target"] = ids.at(record.target);
      entry["prompt_sources"] = id_list(record.prompt_sources);
      entry["kind"] = record.kind == ActivationKind::cascade ? "cascade" : "fallback";
      records.push_back(std::move(entry));
    }
    rounds.push_back(std::move(records));
  }
  doc["rounds"] = std::move(rounds);
  return doc;
}

std::string StubAnnotator::label(const std::string& target_id,
                                 const std::vector<std::pair<std::string, std::string>>&) {
  const auto it = labels_.find(target_id);
  if (it == labels_.end()) fail_validation("no reference label for '" + target_id + "'");
  return it->second;
}

std::map<std::string, std::string> execute_schedule(
    const AnnotationSchedule& schedule, const std::vector<std::string>& ids,
    const std::map<std::string, std::string>& manual_labels, Annotator& annotator) {
  std::map<std::string, std::string> labels;
  for (VertexId v : schedule.manual) {
    const auto it = manual_labels.find(ids.at(v));
    if (it == manual_labels.end()) fail_validation("missing manual label for '" + ids.at(v) + "'");
    labels.insert(*it);
  }
  for (const auto& round : schedule.rounds) {
    std::vector<std::pair<std::string, std::string>> produced;
    for (const auto& record : round) {
      std::vector<std::pair<std::string, std::string>> prompts;
      for (VertexId s : record.prompt_sources) {
        const auto it = labels.find(ids.at(s));
        if (it == labels.end()) fail_validation("prompt source '" + ids.at(s) + "' is unlabeled");
        prompts.emplace_back(it->first, it->second);
      }
      const auto& target = ids.at(record.target);
      produced.emplace_back(target, annotator.label(target, prompts));
    }
    // Labels from a round become visible only to later rounds.
    for (auto& entry : produced) labels.insert(std::move(entry));
  }
  return labels;
}

}  // namespace ideal
