#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "quadrat/error.hpp"
#include "quadrat/fusion.hpp"

using namespace quadrat;

namespace {

TaxonomyTable three_species() {
  const std::vector<TaxonomyRow> rows{{0, 0, 0}, {1, 0, 0}, {2, 1, 0}};
  return TaxonomyTable::from_rows(rows);
}

std::vector<int> genus_index(const TaxonomyTable& t) {
  std::vector<int> out;
  for (auto g : t.species_to_genus()) out.push_back(static_cast<int>(index(g)));
  return out;
}

std::vector<int> family_index(const TaxonomyTable& t) {
  std::vector<int> out;
  for (auto f : t.genus_to_family()) out.push_back(static_cast<int>(index(f)));
  return out;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double spread = 3.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("log_softmax worked values") {
  const auto a = log_softmax(std::vector<double>{0.0, 0.0});
  CHECK(a[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(a[1] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));

  const auto b = log_softmax(std::vector<double>{1.0, 2.0, 1.5});
  // Oracle: log(softmax) computed directly.
  const auto p = oracle::softmax({1.0, 2.0, 1.5});
  for (int i = 0; i < 3; ++i) CHECK(b[static_cast<std::size_t>(i)] == doctest::Approx(std::log(p[static_cast<std::size_t>(i)])).epsilon(1e-12));
  CHECK(b[0] == doctest::Approx(-1.680).epsilon(1e-3));
  CHECK(b[1] == doctest::Approx(-0.680).epsilon(1e-3));
  CHECK(b[2] == doctest::Approx(-1.180).epsilon(1e-3));

  for (double c : {-1e6, -3.0, 0.0, 42.0, 1e6}) {
    for (double x : log_softmax(std::vector<double>{c, c, c})) CHECK(x == doctest::Approx(-std::log(3.0)));
  }
}

TEST_CASE("log_softmax normalises and preserves differences") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto v = random_vector(1 + rng() % 50, rng, 50.0);
    const auto o = log_softmax(v);
    double sum = 0.0;
    for (double x : o) sum += std::exp(x);
    CHECK(std::abs(sum - 1.0) < 1e-9);
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(std::abs((o[i] - o[0]) - (v[i] - v[0])) < 1e-9);
  }
  CHECK_THROWS_AS(log_softmax(std::vector<double>{}), Error);
}

TEST_CASE("worked fusion example flips the argmax to s2") {
  const auto tax = three_species();
  const TileLogits tile{{1, 0, 0}, {1.0, 2.0, 1.5}, std::vector<double>{0.0, 2.0}, std::vector<double>{0.0}};
  const auto fused = fuse(tile, tax);
  const std::vector<double> genus{0.0, 2.0};
  const std::vector<double> family{0.0};
  const auto expected = oracle::fused_by_enumeration(tile.species, &genus, &family, genus_index(tax), family_index(tax));
  for (std::size_t s = 0; s < 3; ++s) CHECK(fused.score[s] == doctest::Approx(expected[s]).epsilon(1e-12));
  CHECK(fused.score[0] == doctest::Approx(-3.807).epsilon(1e-3));
  CHECK(fused.score[1] == doctest::Approx(-2.807).epsilon(1e-3));
  CHECK(fused.score[2] == doctest::Approx(-1.307).epsilon(1e-3));

  CHECK(argmax_top1(tile.species).species == SpeciesId{1});
  const auto top = tile_top1(fused);
  CHECK(top.species == SpeciesId{2});
  CHECK(top.score == doctest::Approx(-1.307).epsilon(1e-3));
}

TEST_CASE("fusion matches exhaustive triple enumeration") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int nf = 1 + static_cast<int>(rng() % 4);
    const int ng = nf + static_cast<int>(rng() % 5);
    const int ns = ng + static_cast<int>(rng() % (21 - ng));
    std::vector<TaxonomyRow> rows;
    for (int s = 0; s < ns; ++s) {
      const int g = s < ng ? s : static_cast<int>(rng() % ng);
      rows.push_back({s, g, g < nf ? g : static_cast<std::int64_t>(g % nf)});
    }
    const auto tax = TaxonomyTable::from_rows(rows);
    TileLogits tile{{1, 0, 0}, random_vector(static_cast<std::size_t>(ns), rng), std::nullopt, std::nullopt};
    if (rng() % 4 != 0) tile.genus = random_vector(static_cast<std::size_t>(ng), rng);
    if (rng() % 4 != 0) tile.family = random_vector(static_cast<std::size_t>(nf), rng);

    const auto fused = fuse(tile, tax);
    const auto expected = oracle::fused_by_enumeration(
        tile.species, tile.genus ? &*tile.genus : nullptr, tile.family ? &*tile.family : nullptr,
        genus_index(tax), family_index(tax));
    for (std::size_t s = 0; s < expected.size(); ++s) {
      CHECK(std::abs(fused.score[s] - expected[s]) < 1e-9);
      CHECK(fused.score[s] <= 0.0);
    }
    const auto oracle_best = static_cast<std::size_t>(std::max_element(expected.begin(), expected.end()) - expected.begin());
    CHECK(index(tile_top1(fused).species) == oracle_best);
  }
}

TEST_CASE("constant shifts of any head leave fused scores unchanged") {
  std::mt19937_64 rng(23);
  const std::vector<TaxonomyRow> rows{{0, 0, 0}, {1, 0, 0}, {2, 1, 1}, {3, 2, 1}, {4, 2, 1}};
  const auto tax = TaxonomyTable::from_rows(rows);
  for (int trial = 0; trial < 50; ++trial) {
    TileLogits tile{{1, 0, 0}, random_vector(5, rng), random_vector(3, rng), random_vector(2, rng)};
    const auto base = fuse(tile, tax);
    auto shifted = tile;
    const double c = std::uniform_real_distribution<double>(-100, 100)(rng);
    for (auto& x : shifted.species) x += c;
    for (auto& x : *shifted.genus) x -= c;
    for (auto& x : *shifted.family) x += 2 * c;
    const auto moved = fuse(shifted, tax);
    for (std::size_t s = 0; s < 5; ++s) CHECK(std::abs(moved.score[s] - base.score[s]) < 1e-9);
  }
}

TEST_CASE("uniform genus and family heads keep the species argmax") {
  std::mt19937_64 rng(29);
  const std::vector<TaxonomyRow> rows{{0, 0, 0}, {1, 0, 0}, {2, 1, 1}, {3, 2, 1}, {4, 2, 1}};
  const auto tax = TaxonomyTable::from_rows(rows);
  for (int trial = 0; trial < 50; ++trial) {
    TileLogits tile{{1, 0, 0}, random_vector(5, rng), std::vector<double>(3, 0.7), std::vector<double>(2, -4.0)};
    CHECK(tile_top1(fuse(tile, tax)).species == argmax_top1(tile.species).species);
  }
}

TEST_CASE("absent genus and family heads reduce to species log_softmax") {
  const auto tax = three_species();
  const TileLogits tile{{1, 0, 0}, {0.3, -1.0, 2.0}, std::nullopt, std::nullopt};
  CHECK(fuse(tile, tax).score == log_softmax(tile.species));
}

TEST_CASE("length mismatches are rejected") {
  const auto tax = three_species();
  CHECK_THROWS_AS(fuse({{1, 0, 0}, {1.0, 2.0}, std::nullopt, std::nullopt}, tax), Error);
  try {
    fuse({{1, 0, 0}, {1.0, 2.0, 3.0}, std::vector<double>{1.0}, std::nullopt}, tax);
    FAIL("expected dimension mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension_mismatch);
  }
}

TEST_CASE("top-1 ties go to the lowest id") {
  const FusedScores equal{{1, 0, 0}, {-2.0, -2.0, -2.0}};
  CHECK(tile_top1(equal) == Top1{SpeciesId{0}, -2.0});

  const auto single = TaxonomyTable::from_rows(std::vector<TaxonomyRow>{{5, 1, 1}});
  const auto top = tile_top1(fuse({{1, 0, 0}, {3.7}, std::vector<double>{1.0}, std::vector<double>{2.0}}, single));
  CHECK(top.species == SpeciesId{0});
  CHECK(top.score == 0.0);
}
