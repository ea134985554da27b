#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "ideal/diffusion.hpp"
#include "ideal/embedding.hpp"
#include "ideal/graph.hpp"

namespace ideal {

enum class SelectionMethod { ideal, ideal_lazy, random, kmeans, mfl, fast_votek, brute_force };

std::string_view method_name(SelectionMethod method);
SelectionMethod parse_method(std::string_view name);

struct SelectionResult {
  SelectionMethod method = SelectionMethod::ideal;
  std::size_t budget = 0;
  // In selection order for greedy methods.
  std::vector<VertexId> selected;
  // Per-step objective increments; empty for methods without an objective.
  std::vector<double> marginal_gains;
  // Objective value of the final set where the method has one (influence
  // estimate, exact influence, facility-location value), else 0.
  double objective = 0.0;
  std::uint64_t seed = 0;
  double wall_time_ms = 0.0;
  std::uint64_t evaluations = 0;
};

// Set function evaluated by the greedy core. The second argument is the
// parallelism the callee may use internally.
using SetFunction = std::function<double(std::span<const VertexId>, unsigned)>;

struct GreedyTrace {
  std::vector<VertexId> selected;
  // values[t] = f(S_{t+1}); gains[t] = values[t] - values[t-1], f(empty) = 0.
  std::vector<double> values;
  std::vector<double> gains;
  std::uint64_t evaluations = 0;
};

// Greedy maximization over the ground set 0..n-1: m times, add the
// candidate maximizing f(S + v), ties to the lowest index. With `lazy`, stale
// marginal gains in a max-heap serve as upper bounds (valid whenever f is
// submodular) and only the top is re-evaluated.
GreedyTrace greedy_maximize(std::size_t n, std::size_t m, const SetFunction& f, bool lazy,
                            unsigned threads = 0);

struct GreedyOptions {
  std::uint32_t reps = kDefaultReps;
  std::uint64_t seed = 0;
  bool lazy = false;
  CoinMode mode = CoinMode::fresh;
  unsigned threads = 0;
};

// Influence maximization on the diffusion graph with Monte-Carlo influence.
SelectionResult greedy_select(const DiffusionGraph& g, std::size_t m,
                              const GreedyOptions& options = {});

// Maximum exact influence over all size-m subsets; ties go to the
// lexicographically smallest subset. Requires C(n, m) <= 10^6.
SelectionResult brute_force_optimal(const DiffusionGraph& g, std::size_t m);

SelectionResult random_select(std::size_t n, std::size_t m, std::uint64_t seed);

struct KMeansOptions {
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;
  unsigned threads = 0;
};

// Lloyd's algorithm with farthest-point seeding (the seed picks the first
// center); returns, for each cluster, the member nearest its centroid.
SelectionResult kmeans_select(const EmbeddingSet& e, std::size_t m, std::uint64_t seed,
                              const KMeansOptions& options = {});

// Greedy facility location: F(S) = sum_i max_{j in S} cos(i, j).
SelectionResult mfl_select(const EmbeddingSet& e, std::size_t m, unsigned threads = 0);

inline constexpr double kDefaultVoteDiscount = 10.0;

// Discounted reverse-k-NN voting: score(u) = sum over voters v (u in N(v))
// of rho^-(number of selected s with v in N(s)).
SelectionResult fast_votek_select(const std::vector<std::vector<VertexId>>& knn, std::size_t m,
                                  double rho = kDefaultVoteDiscount);

// k-NN lists read off a diffusion graph (successor targets per vertex).
std::vector<std::vector<VertexId>> successor_lists(const DiffusionGraph& g);

// Validates 1 <= m <= n.
void check_budget(std::size_t n, std::size_t m);

}  // namespace ideal
