#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ideal/embedding.hpp"
#include "ideal/graph.hpp"

namespace ideal {

inline constexpr std::size_t kDefaultPromptsPerTarget = 5;

enum class ActivationKind { cascade, fallback };

struct ScheduledAnnotation {
  VertexId target;
  // Already-annotated examples used as prompts, most similar first.
  std::vector<VertexId> prompt_sources;
  ActivationKind kind;
};

// Diffusion-ordered labeling plan: the manual set is labeled by hand, then
// each round is labeled by a model prompted with earlier labels.
struct AnnotationSchedule {
  std::vector<VertexId> manual;
  std::vector<std::vector<ScheduledAnnotation>> rounds;

  std::size_t scheduled_count() const;
  std::size_t fallback_count() const;
};

// Runs one cascade from `manual` (same round semantics and coin keying as
// the influence simulation). Each round's newly activated vertices become a
// round of the schedule; each gets its min(c, annotated) most similar
// already-annotated examples as prompt sources. When a cascade dies out with
// vertices left, the unannotated vertex most similar to any annotated one is
// scheduled alone as a fallback round and the cascade restarts from it.
AnnotationSchedule diffusion_schedule(const DiffusionGraph& g, const EmbeddingSet& e,
                                      std::span<const VertexId> manual,
                                      std::size_t c = kDefaultPromptsPerTarget,
                                      std::uint64_t seed = 0);

// Checks coverage and causality; returns a description of the first
// violation, or an empty string.
std::string validate_schedule(const AnnotationSchedule& schedule, std::size_t n);

nlohmann::ordered_json schedule_to_json(const AnnotationSchedule& schedule,
                                        const std::vector<std::string>& ids);

// Label provider for automatic annotation.
class Annotator {
 public:
  virtual ~Annotator() = default;
  // `prompts` pairs each prompt source id with its (already known) label.
  virtual std::string label(const std::string& target_id,
                            const std::vector<std::pair<std::string, std::string>>& prompts) = 0;
};

// Returns the reference label for every target; for end-to-end tests.
class StubAnnotator : public Annotator {
 public:
  explicit StubAnnotator(std::map<std::string, std::string> labels) : labels_(std::move(labels)) {}

  std::string label(const std::string& target_id,
                    const std::vector<std::pair<std::string, std::string>>& prompts) override;

 private:
  std::map<std::string, std::string> labels_;
};

// Walks the schedule in order, labeling every target with `annotator`.
// `manual_labels` must cover the manual set. Returns labels for all ids.
std::map<std::string, std::string> execute_schedule(
    const AnnotationSchedule& schedule, const std::vector<std::string>& ids,
    const std::map<std::string, std::string>& manual_labels, Annotator& annotator);

}  // namespace ideal
