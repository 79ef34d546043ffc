#include <doctest.h>

#include <algorithm>
#include <random>

#include "quadrat/error.hpp"
#include "quadrat/geometry.hpp"

using namespace quadrat;

TEST_CASE("central crop removes floor(frac * side) from each side") {
  CHECK(central_crop({0, 0, 20, 20}, {0.10}) == Rect{2, 2, 18, 18});
  CHECK(central_crop({0, 0, 1000, 800}, {0.05}) == Rect{50, 40, 950, 760});
  const Rect r{3, 4, 17, 9};
  CHECK(central_crop(r, {0.0}) == r);
  // Cropping with frac 0 after any crop changes nothing.
  const auto once = central_crop({0, 0, 37, 23}, {0.12});
  CHECK(central_crop(once, {0.0}) == once);
}

TEST_CASE("crop rejects bad fractions and empty input") {
  CHECK_THROWS_AS(central_crop({0, 0, 10, 10}, {0.3}), Error);
  CHECK_THROWS_AS(central_crop({0, 0, 10, 10}, {-0.01}), Error);
  try {
    central_crop({0, 0, 0, 10}, {0.1});
    FAIL("expected degenerate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate);
  }
}

TEST_CASE("even grid splits into equal disjoint tiles") {
  const auto tiles = tile_grid({0, 0, 16, 16}, {4, 0.0});
  REQUIRE(tiles.size() == 16);
  for (const auto& t : tiles) {
    CHECK(t.rect.width() == 4);
    CHECK(t.rect.height() == 4);
    CHECK(t.rect.x0 == 4 * t.key.col);
    CHECK(t.rect.y0 == 4 * t.key.row);
  }
}

TEST_CASE("uneven grid uses floor boundaries") {
  // Oracle: boundaries floor(i * 16 / 5) for i = 0..5, widths are differences.
  std::vector<int> expected;
  for (int i = 0; i < 5; ++i) expected.push_back((i + 1) * 16 / 5 - i * 16 / 5);
  CHECK(expected == std::vector<int>{3, 3, 3, 3, 4});

  const auto tiles = tile_grid({0, 0, 16, 16}, {5, 0.0});
  REQUIRE(tiles.size() == 25);
  std::vector<int> widths;
  for (int c = 0; c < 5; ++c) widths.push_back(tiles[static_cast<std::size_t>(c)].rect.width());
  CHECK(widths == expected);
}

TEST_CASE("scale 1 yields the region itself") {
  const Rect region{2, 3, 11, 7};
  const auto tiles = tile_grid(region, {1, 0.0});
  REQUIRE(tiles.size() == 1);
  CHECK(tiles[0].rect == region);
  CHECK(tiles[0].key == TileKey{1, 0, 0});
}

TEST_CASE("scale above the shorter side is rejected") {
  try {
    tile_grid({0, 0, 10, 4}, {5, 0.0});
    FAIL("expected scale-too-large");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::scale_too_large);
  }
}

TEST_CASE("overlap enlarges tiles symmetrically and clamps at the region edge") {
  const auto tiles = tile_grid({0, 0, 20, 20}, {2, 0.25});
  // Base tiles are 10x10; floor(0.25 * 10) = 2 extra cells per side.
  CHECK(tiles[0].rect == Rect{0, 0, 12, 12});
  CHECK(tiles[3].rect == Rect{8, 8, 20, 20});
  CHECK_THROWS_AS(tile_grid({0, 0, 20, 20}, {2, 0.5}), Error);
}

TEST_CASE("every cell lies in exactly one tile without overlap") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int x0 = static_cast<int>(rng() % 5);
    const int y0 = static_cast<int>(rng() % 5);
    const Rect region{x0, y0, x0 + 1 + static_cast<int>(rng() % 40), y0 + 1 + static_cast<int>(rng() % 40)};
    const int scale = 1 + static_cast<int>(rng() % std::min(region.width(), region.height()));
    const auto tiles = tile_grid(region, {scale, 0.0});
    REQUIRE(tiles.size() == static_cast<std::size_t>(scale * scale));
    for (int y = region.y0; y < region.y1; ++y) {
      for (int x = region.x0; x < region.x1; ++x) {
        const auto hits = std::count_if(tiles.begin(), tiles.end(),
                                        [&](const TileRef& t) { return t.rect.contains(x, y); });
        REQUIRE(hits == 1);
      }
    }
  }
}

TEST_CASE("neighbours are the in-grid 4-adjacent tiles") {
  CHECK(neighbors({2, 0, 0}, {2, 0.0}) == std::vector<TileKey>{{2, 0, 1}, {2, 1, 0}});
  CHECK(neighbors({3, 1, 1}, {3, 0.0}).size() == 4);
  CHECK(neighbors({1, 0, 0}, {1, 0.0}).empty());
}

TEST_CASE("neighbourhood is symmetric") {
  for (int n = 1; n <= 6; ++n) {
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        for (const auto& u : neighbors({n, r, c}, {n, 0.0})) {
          const auto back = neighbors(u, {n, 0.0});
          CHECK(std::find(back.begin(), back.end(), TileKey{n, r, c}) != back.end());
        }
      }
    }
  }
}
