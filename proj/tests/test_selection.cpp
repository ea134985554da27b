#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ideal/error.hpp"
#include "ideal/exact.hpp"
#include "ideal/selection.hpp"
#include "ideal/theory.hpp"
#include "support.hpp"

using namespace ideal;

namespace {

// a -> b -> c with sure edges, d isolated.
DiffusionGraph path_plus_isolated() {
  return DiffusionGraph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}});
}

double cos_sum_objective(const EmbeddingSet& e, const std::vector<VertexId>& set) {
  double total = 0.0;
  for (VertexId i = 0; i < e.size(); ++i) {
    double best = -2.0;
    for (VertexId s : set) best = std::max(best, cosine(e.row(i), e.row(s)));
    total += best;
  }
  return total;
}

}  // namespace

TEST_CASE("method names round-trip") {
  for (auto m : {SelectionMethod::ideal, SelectionMethod::ideal_lazy, SelectionMethod::random,
                 SelectionMethod::kmeans, SelectionMethod::mfl, SelectionMethod::fast_votek,
                 SelectionMethod::brute_force}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("votek"), Error);
}

TEST_CASE("greedy picks the head of the path") {
  const auto g = path_plus_isolated();
  for (bool lazy : {false, true}) {
    GreedyOptions options;
    options.lazy = lazy;
    const auto r = greedy_select(g, 1, options);
    CHECK(r.selected == std::vector<VertexId>{0});
    CHECK(r.objective == 3.0);
    CHECK(r.marginal_gains == std::vector<double>{3.0});
  }
  GreedyOptions options;
  const auto two = greedy_select(g, 2, options);
  CHECK(two.selected == std::vector<VertexId>{0, 3});
  CHECK(two.objective == 4.0);
}

TEST_CASE("budget equal to the pool selects everything") {
  const auto g = ideal::testing::uniform_graph(5, 0.3);
  const auto r = greedy_select(g, 5, {});
  std::set<VertexId> all(r.selected.begin(), r.selected.end());
  CHECK(all.size() == 5);
  CHECK(r.objective == 5.0);
}

TEST_CASE("budgets outside [1, n] are usage errors") {
  const auto g = ideal::testing::uniform_graph(4, 0.3);
  CHECK_THROWS_AS(greedy_select(g, 0, {}), Error);
  CHECK_THROWS_AS(greedy_select(g, 5, {}), Error);
  CHECK_THROWS_AS(random_select(4, 0, 1), Error);
  CHECK_THROWS_AS(random_select(4, 5, 1), Error);
}

TEST_CASE("greedy is deterministic and thread-independent") {
  const auto e = normalize(ideal::testing::gaussian_embeddings(150, 6, 2));
  const auto g = build_graph(e, 10);
  for (CoinMode mode : {CoinMode::fresh, CoinMode::common}) {
    GreedyOptions a;
    a.seed = 5;
    a.mode = mode;
    a.threads = 1;
    GreedyOptions b = a;
    b.threads = 4;
    const auto ra = greedy_select(g, 8, a);
    const auto rb = greedy_select(g, 8, b);
    CHECK(ra.selected == rb.selected);
    CHECK(ra.marginal_gains == rb.marginal_gains);
    CHECK(ra.objective == rb.objective);
    CHECK(ra.evaluations == rb.evaluations);
  }
}

TEST_CASE("lazy greedy matches naive greedy under common random numbers") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto e = normalize(ideal::testing::gaussian_embeddings(120, 5, 100 + seed));
    const auto g = build_graph(e, 10);
    GreedyOptions naive;
    naive.seed = seed;
    naive.mode = CoinMode::common;
    naive.reps = 20;
    GreedyOptions lazy = naive;
    lazy.lazy = true;
    const auto rn = greedy_select(g, 10, naive);
    const auto rl = greedy_select(g, 10, lazy);
    CHECK(rn.selected == rl.selected);
    CHECK(rn.objective == rl.objective);
    CHECK(rl.evaluations < rn.evaluations);
  }
}

TEST_CASE("greedy marginal gains are non-increasing under common random numbers") {
  const auto e = normalize(ideal::testing::gaussian_embeddings(100, 5, 77));
  const auto g = build_graph(e, 8);
  GreedyOptions options;
  options.mode = CoinMode::common;
  const auto r = greedy_select(g, 12, options);
  for (std::size_t i = 1; i < r.marginal_gains.size(); ++i) {
    CHECK(r.marginal_gains[i] <= r.marginal_gains[i - 1] + 1e-12);
  }
}

TEST_CASE("greedy_maximize on a coverage function") {
  // Sets over a universe of 6 elements.
  const std::vector<std::set<int>> sets{{0, 1, 2}, {2, 3}, {3, 4, 5}, {0}};
  const SetFunction cover = [&](std::span<const VertexId> chosen, unsigned) {
    std::set<int> u;
    for (VertexId s : chosen) u.insert(sets[s].begin(), sets[s].end());
    return static_cast<double>(u.size());
  };
  for (bool lazy : {false, true}) {
    const auto t = greedy_maximize(4, 2, cover, lazy, 1);
    CHECK(t.selected == std::vector<VertexId>{0, 2});
    CHECK(t.values == std::vector<double>{3, 6});
    CHECK(t.gains == std::vector<double>{3, 3});
  }
}

TEST_CASE("brute force on closed edges picks the first m vertices") {
  const auto g = ideal::testing::uniform_graph(6, 0.0);
  const auto r = brute_force_optimal(g, 3);
  CHECK(r.selected == std::vector<VertexId>{0, 1, 2});
  CHECK(r.objective == 3.0);
}

TEST_CASE("brute force singleton on the path") {
  const auto r = brute_force_optimal(path_plus_isolated(), 1);
  CHECK(r.selected == std::vector<VertexId>{0});
  CHECK(r.objective == 3.0);
}

TEST_CASE("brute force matches an independent enumeration") {
  for (std::uint64_t seed = 0; seed < 15; ++seed) {
    const auto g = random_admissible_graph(seed, 6, 6, 12);
    const auto r = brute_force_optimal(g, 2);
    double best = -1.0;
    std::vector<VertexId> arg;
    for (VertexId a = 0; a < 6; ++a) {
      for (VertexId b = a + 1; b < 6; ++b) {
        const std::vector<VertexId> pair{a, b};
        const double v = exact_influence(g, pair);
        if (v > best + 1e-12) {
          best = v;
          arg = pair;
        }
      }
    }
    CHECK(r.objective == doctest::Approx(best).epsilon(1e-12));
    const std::vector<VertexId> chosen = r.selected;
    CHECK(exact_influence(g, chosen) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("random selection") {
  const auto a = random_select(50, 10, 3);
  CHECK(a.selected == random_select(50, 10, 3).selected);
  CHECK(a.selected != random_select(50, 10, 4).selected);
  CHECK(std::set<VertexId>(a.selected.begin(), a.selected.end()).size() == 10);
  auto all = random_select(7, 7, 1).selected;
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<VertexId>{0, 1, 2, 3, 4, 5, 6});
}

TEST_CASE("k-means takes one point from each separated pair") {
  const auto e = EmbeddingSet::create({"a", "b", "c", "d"},
                                      {1, 1, 1.1, 1, 10, 10, 10, 10.1}, 2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = kmeans_select(e, 2, seed);
    REQUIRE(r.selected.size() == 2);
    const bool first_pair = r.selected[0] <= 1 || r.selected[1] <= 1;
    const bool second_pair = r.selected[0] >= 2 || r.selected[1] >= 2;
    CHECK(first_pair);
    CHECK(second_pair);
  }
}

TEST_CASE("k-means with m = n returns every point") {
  const auto e = ideal::testing::gaussian_embeddings(12, 3, 6);
  auto s = kmeans_select(e, 12, 2).selected;
  std::sort(s.begin(), s.end());
  CHECK(s.size() == 12);
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
}

TEST_CASE("k-means survives duplicate points") {
  // Many identical points force empty clusters during assignment.
  std::vector<std::string> ids;
  std::vector<double> values;
  for (int i = 0; i < 10; ++i) {
    ids.push_back(std::to_string(i));
    values.push_back(i < 8 ? 1.0 : 5.0 + i);
    values.push_back(1.0);
  }
  const auto e = EmbeddingSet::create(ids, values, 2);
  const auto r = kmeans_select(e, 4, 1);
  CHECK(std::set<VertexId>(r.selected.begin(), r.selected.end()).size() == 4);
  CHECK(kmeans_select(e, 4, 1).selected == r.selected);
}

TEST_CASE("facility location on identical vectors picks vertex 0") {
  const auto e = EmbeddingSet::create({"a", "b", "c"}, {1, 2, 1, 2, 1, 2}, 2);
  const auto r = mfl_select(e, 1);
  CHECK(r.selected == std::vector<VertexId>{0});
  CHECK(r.objective == doctest::Approx(3.0));
}

TEST_CASE("facility location singleton maximizes the similarity row sum") {
  const auto e = ideal::testing::gaussian_embeddings(40, 4, 12);
  const auto r = mfl_select(e, 1);
  double best = -1e9;
  VertexId arg = 0;
  for (VertexId j = 0; j < e.size(); ++j) {
    const double v = cos_sum_objective(e, {j});
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  CHECK(r.selected[0] == arg);
  CHECK(r.objective == doctest::Approx(best));
}

TEST_CASE("facility location objective grows with every pick") {
  const auto e = ideal::testing::gaussian_embeddings(60, 5, 13);
  const auto r = mfl_select(e, 10, 2);
  double previous = -1e9;
  for (std::size_t i = 1; i <= r.selected.size(); ++i) {
    const std::vector<VertexId> prefix(r.selected.begin(), r.selected.begin() + i);
    const double value = cos_sum_objective(e, prefix);
    CHECK(value >= previous - 1e-9);
    previous = value;
  }
  CHECK(r.objective == doctest::Approx(previous));
  CHECK(mfl_select(e, 10, 1).selected == r.selected);
}

TEST_CASE("fast vote-k on a symmetric triangle") {
  const std::vector<std::vector<VertexId>> knn{{1, 2}, {0, 2}, {0, 1}};
  CHECK(fast_votek_select(knn, 1).selected == std::vector<VertexId>{0});
}

TEST_CASE("fast vote-k first pick has the most voters") {
  const std::vector<std::vector<VertexId>> knn{{3}, {3}, {1}, {2}, {3}};
  const auto r = fast_votek_select(knn, 1);
  CHECK(r.selected == std::vector<VertexId>{3});
  CHECK(r.marginal_gains == std::vector<double>{3.0});
}

TEST_CASE("fast vote-k matches a hand score table") {
  // voters: 0<-{1,2}, 1<-{0,2}, 2<-{0,1,3,5}, 3<-{4}, 4<-{3,5}, 5<-{4}.
  // Step 1 scores 2,2,4,1,2,1 -> pick 2, covering 0 and 1.
  // Step 2 scores 1.1,1.1,-,1,2,1 -> pick 4.
  const std::vector<std::vector<VertexId>> knn{{1, 2}, {0, 2}, {0, 1}, {2, 4}, {3, 5}, {4, 2}};
  const auto r = fast_votek_select(knn, 2, 10.0);
  CHECK(r.selected == std::vector<VertexId>{2, 4});
  CHECK(r.marginal_gains[0] == doctest::Approx(4.0));
  CHECK(r.marginal_gains[1] == doctest::Approx(2.0));
  CHECK_THROWS_AS(fast_votek_select(knn, 2, 1.0), Error);
}
