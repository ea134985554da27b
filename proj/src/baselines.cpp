// Comparison selectors: k-means representatives, greedy facility location and
// Fast Vote-k.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ideal/error.hpp"
#include "ideal/parallel.hpp"
#include "ideal/rng.hpp"
#include "ideal/selection.hpp"

namespace ideal {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sum += diff * diff;
  }
  return sum;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

class Clustering {
 public:
  Clustering(const EmbeddingSet& e, std::size_t m, unsigned threads)
      : e_(e), m_(m), d_(e.dim()), threads_(threads), centroids_(m * e.dim()),
        assignment_(e.size()), distance_(e.size()) {}

  std::span<const double> centroid(std::size_t c) const { return {centroids_.data() + c * d_, d_}; }

  // Farthest-point seeding; `first` is the initial center.
  void seed_centers(VertexId first) {
    const std::size_t n = e_.size();
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::vector<char> taken(n, 0);
    VertexId next = first;
    for (std::size_t c = 0; c < m_; ++c) {
      taken[next] = 1;
      set_centroid(c, e_.row(next));
      for (VertexId i = 0; i < n; ++i) {
        nearest[i] = std::min(nearest[i], squared_distance(e_.row(i), e_.row(next)));
      }
      if (c + 1 == m_) break;
      double best = -1.0;
      for (VertexId i = 0; i < n; ++i) {
        if (!taken[i] && nearest[i] > best) {
          best = nearest[i];
          next = i;
        }
      }
    }
  }

  // Nearest-centroid assignment (ties to the lower cluster), then every
  // empty cluster takes the point farthest from its own centroid among
  // clusters that can spare one.
  void assign() {
    parallel_for(e_.size(), threads_, [&](std::size_t i) {
      const auto x = e_.row(static_cast<VertexId>(i));
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_c = 0;
      for (std::size_t c = 0; c < m_; ++c) {
        const double dist = squared_distance(x, centroid(c));
        if (dist < best) {
          best = dist;
          best_c = c;
        }
      }
      assignment_[i] = best_c;
      distance_[i] = best;
    });
    std::vector<std::size_t> sizes(m_, 0);
    for (std::size_t c : assignment_) ++sizes[c];
    for (std::size_t c = 0; c < m_; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t donor = e_.size();
      for (std::size_t i = 0; i < e_.size(); ++i) {
        if (sizes[assignment_[i]] < 2) continue;
        if (donor == e_.size() || distance_[i] > distance_[donor]) donor = i;
      }
      --sizes[assignment_[donor]];
      ++sizes[c];
      assignment_[donor] = c;
      distance_[donor] = 0.0;
      set_centroid(c, e_.row(static_cast<VertexId>(donor)));
    }
  }

  // Recomputes centroids as member means; returns the largest shift.
  double update() {
    std::vector<double> sums(m_ * d_, 0.0);
    std::vector<std::size_t> sizes(m_, 0);
    for (std::size_t i = 0; i < e_.size(); ++i) {
      const auto x = e_.row(static_cast<VertexId>(i));
      const std::size_t c = assignment_[i];
      ++sizes[c];
      for (std::size_t j = 0; j < d_; ++j) sums[c * d_ + j] += x[j];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < m_; ++c) {
      for (std::size_t j = 0; j < d_; ++j) sums[c * d_ + j] /= static_cast<double>(sizes[c]);
      shift = std::max(shift, std::sqrt(squared_distance(centroid(c), {sums.data() + c * d_, d_})));
    }
    centroids_ = std::move(sums);
    return shift;
  }

  std::vector<VertexId> representatives() const {
    std::vector<VertexId> picks(m_, 0);
    std::vector<double> best(m_, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < e_.size(); ++i) {
      const std::size_t c = assignment_[i];
      const double dist = squared_distance(e_.row(static_cast<VertexId>(i)), centroid(c));
      if (dist < best[c]) {
        best[c] = dist;
        picks[c] = static_cast<VertexId>(i);
      }
    }
    return picks;
  }

 private:
  void set_centroid(std::size_t c, std::span<const double> x) {
    std::copy(x.begin(), x.end(), centroids_.begin() + static_cast<std::ptrdiff_t>(c * d_));
  }

  const EmbeddingSet& e_;
  std::size_t m_;
  std::size_t d_;
  unsigned threads_;
  std::vector<double> centroids_;
  std::vector<std::size_t> assignment_;
  std::vector<double> distance_;
};

}  // namespace

SelectionResult kmeans_select(const EmbeddingSet& e, std::size_t m, std::uint64_t seed,
                              const KMeansOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_budget(e.size(), m);
  Clustering clustering(e, m, options.threads);
  SplitMix64 rng(seed);
  clustering.seed_centers(static_cast<VertexId>(rng.below(e.size())));
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    clustering.assign();
    if (clustering.update() < options.tolerance) break;
  }
  clustering.assign();

  SelectionResult result;
  result.method = SelectionMethod::kmeans;
  result.budget = m;
  result.selected = clustering.representatives();
  result.seed = seed;
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

SelectionResult mfl_select(const EmbeddingSet& e, std::size_t m, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = e.size();
  check_budget(n, m);

  std::vector<double> norms(n);
  for (VertexId i = 0; i < n; ++i) norms[i] = l2_norm(e.row(i));
  std::vector<double> sim(n * n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto vi = static_cast<VertexId>(i);
    for (VertexId j = 0; j < n; ++j) {
      sim[i * n + j] = cosine_unchecked(e.row(vi), norms[i], e.row(j), norms[j]);
    }
  });

  // coverage[i] = max_{j in S} cos(i, j); undefined while S is empty.
  std::vector<double> coverage(n, 0.0);
  std::vector<char> chosen(n, 0);
  std::vector<double> gains(n);
  SelectionResult result;
  result.method = SelectionMethod::mfl;
  result.budget = m;
  for (std::size_t step = 0; step < m; ++step) {
    const bool first = step == 0;
    parallel_for(n, threads, [&](std::size_t j) {
      if (chosen[j]) return;
      double gain = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double s = sim[i * n + j];
        gain += first ? s : std::max(s - coverage[i], 0.0);
      }
      gains[j] = gain;
    });
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!chosen[j] && (best == n || gains[j] > gains[best])) best = j;
    }
    chosen[best] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = sim[i * n + best];
      coverage[i] = first ? s : std::max(coverage[i], s);
    }
    result.selected.push_back(static_cast<VertexId>(best));
    result.marginal_gains.push_back(gains[best]);
    result.objective += gains[best];
  }
  result.evaluations = static_cast<std::uint64_t>(m) * n;
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

SelectionResult fast_votek_select(const std::vector<std::vector<VertexId>>& knn, std::size_t m,
                                  double rho) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = knn.size();
  check_budget(n, m);
  if (!(rho > 1.0)) fail_usage("vote discount rho must be greater than 1");

  std::vector<std::vector<VertexId>> voters(n);
  for (VertexId v = 0; v < n; ++v) {
    for (VertexId u : knn[v]) {
      if (u >= n) fail_validation("k-NN entry " + std::to_string(u) + " out of range");
      voters[u].push_back(v);
    }
  }
  // covered[v] = number of selected s with v in N(s).
  std::vector<std::size_t> covered(n, 0);
  std::vector<char> chosen(n, 0);
  SelectionResult result;
  result.method = SelectionMethod::fast_votek;
  result.budget = m;
  for (std::size_t step = 0; step < m; ++step) {
    std::size_t best = n;
    double best_score = 0.0;
    for (VertexId u = 0; u < n; ++u) {
      if (chosen[u]) continue;
      double score = 0.0;
      for (VertexId v : voters[u]) score += std::pow(rho, -static_cast<double>(covered[v]));
      if (best == n || score > best_score) {
        best = u;
        best_score = score;
      }
    }
    chosen[best] = 1;
    for (VertexId v : knn[best]) ++covered[v];
    result.selected.push_back(static_cast<VertexId>(best));
    result.marginal_gains.push_back(best_score);
  }
  result.evaluations = m * n;
  result.wall_time_ms = elapsed_ms(start);
  return result;
}

}  // namespace ideal
