#include <doctest.h>

#include <cmath>
#include <set>

#include "ideal/diffusion.hpp"
#include "ideal/error.hpp"
#include "ideal/exact.hpp"
#include "ideal/theory.hpp"
#include "support.hpp"

using namespace ideal;

namespace {

DiffusionGraph path3(double p_ab, double p_bc) {
  return DiffusionGraph::from_edges(3, {{0, 1, p_ab}, {1, 2, p_bc}});
}

DiffusionGraph star(std::size_t leaves, double p) {
  std::vector<EdgeSpec> edges;
  for (VertexId leaf = 1; leaf <= leaves; ++leaf) edges.push_back({0, leaf, p});
  return DiffusionGraph::from_edges(leaves + 1, std::move(edges));
}

}  // namespace

TEST_CASE("closed edges never fire") {
  const auto g = ideal::testing::uniform_graph(6, 0.0);
  const std::vector<VertexId> seeds{0, 2, 4};
  for (std::uint64_t r = 0; r < 50; ++r) {
    auto stream = RunStream::fresh(1, subset_hash(seeds), r);
    const auto trace = simulate_cascade(g, seeds, stream);
    CHECK(trace.rounds.empty());
    CHECK(trace.activated_count() == 3);
    CHECK(stream.draws() == 0);
  }
  const auto est = estimate_influence(g, seeds, 25, 3);
  CHECK(est.mean == 3.0);
  CHECK(est.std_error == 0.0);
}

TEST_CASE("sure edges flood the reachable set") {
  // 0 -> 1 -> 2, 3 -> 4 with p = 1; 4 and 5 unreachable from 0.
  const auto g = DiffusionGraph::from_edges(6, {{0, 1, 1.0}, {1, 2, 1.0}, {3, 4, 1.0}});
  auto stream = RunStream::fresh(0, 0, 0);
  const std::vector<VertexId> seeds{0};
  const auto trace = simulate_cascade(g, seeds, stream);
  REQUIRE(trace.rounds.size() == 2);
  CHECK(trace.rounds[0] == std::vector<Activation>{{1, 0}});
  CHECK(trace.rounds[1] == std::vector<Activation>{{2, 1}});
  CHECK(stream.draws() == 0);
  CHECK(estimate_influence(path3(1, 1), seeds, 10, 0).mean == 3.0);
}

TEST_CASE("a half edge fires half the time") {
  const auto g = DiffusionGraph::from_edges(2, {{0, 1, 0.5}});
  const std::vector<VertexId> seeds{0};
  int fired = 0;
  for (std::uint64_t r = 0; r < 10000; ++r) {
    auto stream = RunStream::fresh(42, subset_hash(seeds), r);
    fired += cascade_size(g, seeds, stream) == 2 ? 1 : 0;
  }
  CHECK(std::abs(fired / 10000.0 - 0.5) <= 0.015);
}

TEST_CASE("star mean is one plus half the leaves") {
  const auto g = star(4, 0.5);
  const std::vector<VertexId> seeds{0};
  const auto est = estimate_influence(g, seeds, 100000, 7, {CoinMode::fresh, 2});
  CHECK(est.reps == 100000);
  CHECK(est.subset_size == 1);
  CHECK(est.std_error > 0.0);
  CHECK(std::abs(est.mean - 3.0) <= 3.0 * est.std_error);
}

TEST_CASE("estimates are reproducible across thread counts") {
  const auto e = normalize(ideal::testing::gaussian_embeddings(200, 8, 3));
  const auto g = build_graph(e, 10);
  const std::vector<VertexId> seeds{3, 17, 99};
  const auto one = estimate_influence(g, seeds, 500, 11, {CoinMode::fresh, 1});
  for (unsigned threads : {2u, 3u, 8u}) {
    const auto many = estimate_influence(g, seeds, 500, 11, {CoinMode::fresh, threads});
    CHECK(many.mean == one.mean);
    CHECK(many.std_error == one.std_error);
    CHECK(many.total == one.total);
  }
  // Seed order and duplicates do not matter.
  const std::vector<VertexId> shuffled{99, 3, 17, 3};
  CHECK(estimate_influence(g, shuffled, 500, 11).mean == one.mean);
  CHECK(estimate_influence(g, seeds, 500, 12).mean != one.mean);
}

TEST_CASE("each edge is tossed at most once per run") {
  const auto e = normalize(ideal::testing::gaussian_embeddings(120, 6, 8));
  const auto g = build_graph(e, 10);
  const std::vector<VertexId> seeds{0, 1, 2, 3, 4};
  for (std::uint64_t r = 0; r < 200; ++r) {
    auto stream = RunStream::fresh(5, subset_hash(seeds), r);
    const auto trace = simulate_cascade(g, seeds, stream);
    CHECK(stream.draws() <= g.uncertain_edge_count());

    // Every activation uses a real edge from a vertex active in an earlier round.
    std::set<VertexId> active(seeds.begin(), seeds.end());
    for (const auto& round : trace.rounds) {
      for (const auto& a : round) {
        CHECK(active.count(a.activated_by) == 1);
        bool edge = false;
        for (const auto& s : g.successors(a.activated_by)) edge |= s.target == a.vertex;
        CHECK(edge);
      }
      for (const auto& a : round) CHECK(active.insert(a.vertex).second);
    }
  }
}

TEST_CASE("cascade_size agrees with the traced cascade") {
  const auto g = ideal::testing::uniform_graph(8, 0.3);
  const std::vector<VertexId> seeds{1, 5};
  for (std::uint64_t r = 0; r < 100; ++r) {
    auto a = RunStream::fresh(9, subset_hash(seeds), r);
    auto b = RunStream::fresh(9, subset_hash(seeds), r);
    CHECK(cascade_size(g, seeds, a) == simulate_cascade(g, seeds, b).activated_count());
    CHECK(a.draws() == b.draws());
  }
}

TEST_CASE("exact influence on hand-computed graphs") {
  const auto zero = ideal::testing::uniform_graph(5, 0.0);
  const std::vector<VertexId> three{0, 1, 4};
  CHECK(exact_influence(zero, three) == 3.0);

  const auto edge = DiffusionGraph::from_edges(2, {{0, 1, 0.3}});
  const std::vector<VertexId> a{0};
  CHECK(exact_influence(edge, a) == doctest::Approx(1.3));
  CHECK(exact_influence(path3(0.5, 0.5), a) == doctest::Approx(1.75));

  const InfluenceTable table(path3(0.5, 0.5));
  CHECK(table.value(a) == doctest::Approx(1.75));
  CHECK(table[0] == 0.0);
  CHECK(table[table.full()] == 3.0);
}

TEST_CASE("exact influence refuses oversized graphs") {
  const auto g = ideal::testing::uniform_graph(6, 0.5);  // 30 uncertain edges
  const std::vector<VertexId> a{0};
  CHECK_THROWS_AS(exact_influence(g, a), Error);
}

TEST_CASE("table and direct enumeration agree") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto g = random_admissible_graph(seed, 2, 7, 10);
    const InfluenceTable table(g);
    for (SubsetMask set = 1; set <= table.full(); ++set) {
      const auto seeds = from_mask(set);
      REQUIRE(to_mask(seeds) == set);
      CHECK(table[set] == doctest::Approx(exact_influence(g, seeds)).epsilon(1e-12));
    }
  }
}

TEST_CASE("Monte-Carlo estimates agree with exact influence") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_admissible_graph(1000 + seed, 3, 7, 10);
    const std::vector<VertexId> seeds{0};
    const auto est = estimate_influence(g, seeds, 20000, seed, {CoinMode::fresh, 2});
    CHECK(std::abs(est.mean - exact_influence(g, seeds)) <= 4.0 * est.std_error + 1e-9);
  }
}

TEST_CASE("common random numbers share coins between subsets") {
  const auto g = ideal::testing::uniform_graph(6, 0.4);
  const std::vector<VertexId> small{0};
  const std::vector<VertexId> large{0, 3};
  // With shared coins the live-edge graph is common, so influence is
  // monotone run by run.
  for (std::uint64_t r = 0; r < 200; ++r) {
    auto a = RunStream::common(4, r);
    auto b = RunStream::common(4, r);
    CHECK(cascade_size(g, small, a) <= cascade_size(g, large, b));
  }
}

TEST_CASE("invalid seed sets") {
  const auto g = ideal::testing::uniform_graph(3, 0.5);
  const std::vector<VertexId> none;
  const std::vector<VertexId> bad{7};
  CHECK_THROWS_AS(estimate_influence(g, none), Error);
  CHECK_THROWS_AS(estimate_influence(g, bad), Error);
  const std::vector<VertexId> ok{0};
  CHECK_THROWS_AS(estimate_influence(g, ok, 0), Error);
}

TEST_CASE("trace export round-trips") {
  ideal::testing::TempDir dir;
  CascadeTrace empty{{2}, {}};
  export_cascade_trace(empty, dir.file("empty.json"));
  CHECK(trace_to_json(empty)["rounds"].empty());
  CHECK(load_cascade_trace(dir.file("empty.json")) == empty);

  CascadeTrace two{{0}, {{{1, 0}, {2, 0}}, {{3, 2}}}};
  export_cascade_trace(two, dir.file("two.json"));
  const auto back = load_cascade_trace(dir.file("two.json"));
  CHECK(back.rounds.size() == 2);
  CHECK(back == two);

  const auto g = ideal::testing::uniform_graph(10, 0.35);
  const std::vector<VertexId> seeds{4};
  auto stream = RunStream::fresh(3, subset_hash(seeds), 0);
  const auto real = simulate_cascade(g, seeds, stream);
  export_cascade_trace(real, dir.file("real.json"));
  CHECK(load_cascade_trace(dir.file("real.json")) == real);
}
