#include <numeric>
#include <random>

#include "doctest.h"
#include "eventflux/analysis.hpp"
#include "eventflux/error.hpp"

using namespace eventflux;
using analysis::GradientSet;

namespace {

GradientSet random_set(std::mt19937_64& rng, std::size_t m, std::size_t dim) {
  std::normal_distribution<float> nd(0.0f, 1.0f);
  GradientSet g;
  g.layer_id = "conv1";
  g.vectors.assign(m, std::vector<float>(dim));
  for (auto& v : g.vectors)
    for (auto& x : v) x = nd(rng);
  return g;
}

}  // namespace

TEST_SUITE("cosine") {

TEST_CASE("one hundred vectors give 4950 pairs") {
  std::mt19937_64 rng(1);
  const auto sims = analysis::pairwise_cosine(random_set(rng, 100, 64));
  CHECK(sims.size() == 4950);
  for (double s : sims) {
    CHECK(s >= -1.0 - 1e-12);
    CHECK(s <= 1.0 + 1e-12);
  }
}

TEST_CASE("identical and orthogonal vectors") {
  GradientSet g;
  g.vectors = {{1, 2, 3}, {1, 2, 3}};
  CHECK(analysis::pairwise_cosine(g).at(0) == doctest::Approx(1.0).epsilon(1e-15));
  g.vectors = {{1, 0, 0}, {0, 1, 0}};
  CHECK(analysis::pairwise_cosine(g).at(0) == 0.0);
  g.vectors = {{1, 0}, {-2, 0}};
  CHECK(analysis::pairwise_cosine(g).at(0) == doctest::Approx(-1.0));
}

TEST_CASE("pairs come in lexicographic order") {
  GradientSet g;
  g.vectors = {{1, 0}, {0, 1}, {1, 1}, {-1, 0}};
  const auto s = analysis::pairwise_cosine(g);
  const double r = std::sqrt(0.5);
  const std::vector<double> expected{0.0, r, -1.0, r, 0.0, -r};
  REQUIRE(s.size() == expected.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == doctest::Approx(expected[i]));
}

TEST_CASE("errors") {
  GradientSet g;
  g.vectors = {{1, 2}};
  CHECK_THROWS_AS(analysis::pairwise_cosine(g), Error);
  g.vectors = {{1, 2}, {0, 0}};
  try {
    analysis::pairwise_cosine(g);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
    CHECK(std::string(e.what()).find("vector 1") != std::string::npos);
  }
  g.vectors = {{1, 2}, {1, 2, 3}};
  CHECK_THROWS_AS(analysis::pairwise_cosine(g), Error);
}

TEST_CASE("property: rescaling and thread count do not change the output") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = random_set(rng, 2 + rng() % 40, 1 + rng() % 100);
    const auto base = analysis::pairwise_cosine(g, 1);
    CHECK(analysis::pairwise_cosine(g, 4) == base);
    for (auto& v : g.vectors)
      for (auto& x : v) x *= 8.0f;
    const auto scaled = analysis::pairwise_cosine(g);
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(scaled[i] == doctest::Approx(base[i]).epsilon(1e-12));
  }
}

TEST_CASE("histogram binning") {
  const auto empty = analysis::histogram(std::vector<double>{}, 4, -1, 1);
  REQUIRE(empty.size() == 4);
  for (const auto& b : empty) CHECK(b.count == 0);

  const auto h = analysis::histogram(std::vector<double>{-1, 0, 1}, 2, -1, 1);
  REQUIRE(h.size() == 2);
  CHECK(h[0].count == 1);
  CHECK(h[1].count == 2);
  CHECK(h[0].lo == -1.0);
  CHECK(h[1].hi == 1.0);

  const auto clamped = analysis::histogram(std::vector<double>{-5, 5, 0.25}, 4, -1, 1);
  CHECK(clamped[0].count == 1);
  CHECK(clamped[2].count == 1);
  CHECK(clamped[3].count == 1);

  CHECK_THROWS_AS(analysis::histogram(std::vector<double>{}, 0, -1, 1), Error);
  CHECK_THROWS_AS(analysis::histogram(std::vector<double>{}, 3, 1, 1), Error);
}

TEST_CASE("histogram of similarities conserves the pair count") {
  std::mt19937_64 rng(3);
  const auto sims = analysis::pairwise_cosine(random_set(rng, 100, 16));
  const auto h = analysis::histogram(sims, analysis::kCosineHistogramBins, -1, 1);
  CHECK(h.size() == 50);
  std::size_t total = 0;
  for (const auto& b : h) total += b.count;
  CHECK(total == 4950);
}

}  // TEST_SUITE
