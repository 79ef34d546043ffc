#include "quadrat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quadrat/error.hpp"

namespace quadrat {

Rect central_crop(const Rect& image, CropSpec spec) {
  if (image.empty() || image.x0 < 0 || image.y0 < 0) {
    throw Error(ErrorKind::degenerate, "crop input rect is empty or negative");
  }
  if (!(spec.frac >= 0.0 && spec.frac <= 0.25)) {
    throw Error(ErrorKind::invalid_config,
                "crop fraction " + std::to_string(spec.frac) + " outside [0, 0.25]");
  }
  const int dx = static_cast<int>(std::floor(spec.frac * image.width()));
  const int dy = static_cast<int>(std::floor(spec.frac * image.height()));
  Rect out{image.x0 + dx, image.y0 + dy, image.x1 - dx, image.y1 - dy};
  if (out.empty()) throw Error(ErrorKind::degenerate, "crop leaves an empty rect");
  return out;
}

std::vector<TileRef> tile_grid(const Rect& region, GridSpec spec) {
  if (region.empty()) throw Error(ErrorKind::degenerate, "tiling an empty region");
  if (spec.scale < 1) {
    throw Error(ErrorKind::invalid_config, "grid scale must be >= 1");
  }
  if (!(spec.overlap_frac >= 0.0 && spec.overlap_frac < 0.5)) {
    throw Error(ErrorKind::invalid_config, "overlap fraction outside [0, 0.5)");
  }
  const int w = region.width();
  const int h = region.height();
  if (spec.scale > std::min(w, h)) {
    throw Error(ErrorKind::scale_too_large, "scale " + std::to_string(spec.scale) +
                                                " exceeds region " + std::to_string(w) + "x" +
                                                std::to_string(h));
  }
  const long n = spec.scale;
  auto xb = [&](long i) { return region.x0 + static_cast<int>(i * w / n); };
  auto yb = [&](long i) { return region.y0 + static_cast<int>(i * h / n); };

  std::vector<TileRef> tiles;
  tiles.reserve(static_cast<std::size_t>(n * n));
  for (int row = 0; row < spec.scale; ++row) {
    for (int col = 0; col < spec.scale; ++col) {
      Rect r{xb(col), yb(row), xb(col + 1), yb(row + 1)};
      if (spec.overlap_frac > 0.0) {
        const int ex = static_cast<int>(std::floor(spec.overlap_frac * r.width()));
        const int ey = static_cast<int>(std::floor(spec.overlap_frac * r.height()));
        r = Rect{std::max(region.x0, r.x0 - ex), std::max(region.y0, r.y0 - ey),
                 std::min(region.x1, r.x1 + ex), std::min(region.y1, r.y1 + ey)};
      }
      tiles.push_back({{spec.scale, row, col}, r});
    }
  }
  return tiles;
}

std::vector<TileKey> neighbors(const TileKey& tile, GridSpec spec) {
  std::vector<TileKey> out;
  const int n = spec.scale;
  if (tile.row > 0) out.push_back({n, tile.row - 1, tile.col});
  if (tile.col > 0) out.push_back({n, tile.row, tile.col - 1});
  if (tile.col + 1 < n) out.push_back({n, tile.row, tile.col + 1});
  if (tile.row + 1 < n) out.push_back({n, tile.row + 1, tile.col});
  return out;
}

}  // namespace quadrat
