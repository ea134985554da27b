#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ideal/error.hpp"
#include "ideal/retrieval.hpp"
#include "support.hpp"

using namespace ideal;

namespace {

// Full descending sort of the annotated rows, ties by pool row.
std::vector<std::string> oracle(const EmbeddingSet& pool, std::vector<VertexId> annotated,
                                std::span<const double> query, std::size_t c) {
  std::sort(annotated.begin(), annotated.end());
  std::stable_sort(annotated.begin(), annotated.end(), [&](VertexId a, VertexId b) {
    return cosine(query, pool.row(a)) > cosine(query, pool.row(b));
  });
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < std::min(c, annotated.size()); ++i) ids.push_back(pool.id(annotated[i]));
  return ids;
}

std::vector<std::string> ids_of(const std::vector<RetrievedPrompt>& hits) {
  std::vector<std::string> ids;
  for (const auto& h : hits) ids.push_back(h.id);
  return ids;
}

}  // namespace

TEST_CASE("a query equal to an annotated vector ranks it first") {
  const auto pool = ideal::testing::gaussian_embeddings(30, 6, 1);
  const std::vector<VertexId> annotated{4, 9, 17, 22};
  const RetrievalIndex index(pool, annotated);
  const auto hits = index.retrieve(pool.row(17), 1);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].id == "v17");
  CHECK(hits[0].similarity == doctest::Approx(1.0));
}

TEST_CASE("c beyond the index returns the whole index sorted") {
  const auto pool = ideal::testing::gaussian_embeddings(20, 3, 2);
  const std::vector<VertexId> annotated{1, 5, 8};
  const RetrievalIndex index(pool, annotated);
  const auto hits = index.retrieve(pool.row(0), 10);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].similarity >= hits[1].similarity);
  CHECK(hits[1].similarity >= hits[2].similarity);
  CHECK(ids_of(hits) == oracle(pool, annotated, pool.row(0), 10));
}

TEST_CASE("five-vector pool against hand cosines") {
  // Query along (1, 1): a and b tie at 1/sqrt(2), c = (3, 4) scores 7/(5 sqrt(2)),
  // e = (2, -2) is orthogonal and d = (-1, 0) scores -1/sqrt(2).
  const auto pool = EmbeddingSet::create({"a", "b", "c", "d", "e"},
                                         {1, 0, 0, 1, 3, 4, -1, 0, 2, -2}, 2);
  const std::vector<VertexId> annotated{4, 3, 2, 1, 0};
  const RetrievalIndex index(pool, annotated);
  const std::vector<double> query{1, 1};
  const auto hits = index.retrieve(query, 5);
  CHECK(ids_of(hits) == std::vector<std::string>{"c", "a", "b", "e", "d"});
  const double r = 1 / std::sqrt(2.0);
  CHECK(hits[0].similarity == doctest::Approx(7 * r / 5));
  CHECK(hits[1].similarity == doctest::Approx(r));
  CHECK(hits[2].similarity == doctest::Approx(r));
  CHECK(hits[3].similarity == doctest::Approx(0.0));
  CHECK(hits[4].similarity == doctest::Approx(-r));
  CHECK(ids_of(hits) == oracle(pool, annotated, query, 5));
}

TEST_CASE("retrieval matches a full sort on random pools") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    SplitMix64 rng(seed);
    const std::size_t n = 1 + rng.below(200);
    const auto pool = ideal::testing::gaussian_embeddings(n, 2 + rng.below(5), seed);
    const auto count = static_cast<std::uint32_t>(1 + rng.below(n));
    const auto annotated = sample_without_replacement(static_cast<std::uint32_t>(n), count, seed);
    const RetrievalIndex index(pool, annotated);
    const auto query = ideal::testing::gaussian_embeddings(1, pool.dim(), seed + 1000);
    const std::size_t c = 1 + rng.below(12);
    CHECK(ids_of(index.retrieve(query.row(0), c)) == oracle(pool, annotated, query.row(0), c));
  }
}

TEST_CASE("ties break by pool row, not by annotation order") {
  const auto pool = EmbeddingSet::create({"z", "y", "x"}, {1, 0, 1, 0, 0, 1}, 2);
  const std::vector<VertexId> annotated{1, 0, 2};
  const RetrievalIndex index(pool, annotated);
  const std::vector<double> query{1, 0};
  CHECK(ids_of(index.retrieve(query, 2)) == std::vector<std::string>{"z", "y"});
}

TEST_CASE("random retrieval") {
  const auto pool = ideal::testing::gaussian_embeddings(10, 2, 5);
  const std::vector<VertexId> annotated{0, 3, 6, 9};
  const RetrievalIndex index(pool, annotated);
  auto all = index.random_retrieve(4, 7);
  CHECK(all == index.random_retrieve(4, 7));
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<std::string>{"v0", "v3", "v6", "v9"});

  const std::vector<VertexId> single{2};
  CHECK(RetrievalIndex(pool, single).random_retrieve(1, 0) == std::vector<std::string>{"v2"});
}

TEST_CASE("invalid retrieval indexes") {
  const auto pool = ideal::testing::gaussian_embeddings(5, 2, 5);
  const std::vector<VertexId> none;
  const std::vector<VertexId> dup{1, 1};
  CHECK_THROWS_AS(RetrievalIndex(pool, none), Error);
  CHECK_THROWS_AS(RetrievalIndex(pool, dup), Error);
  const std::vector<VertexId> ok{1};
  const RetrievalIndex index(pool, ok);
  const std::vector<double> wrong{1, 2, 3};
  CHECK_THROWS_AS(index.retrieve(wrong, 1), Error);
}
