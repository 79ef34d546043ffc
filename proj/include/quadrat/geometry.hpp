#pragma once

#include <compare>
#include <vector>

namespace quadrat {

/// Half-open integer cell rectangle [x0, x1) x [y0, y1).
struct Rect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  bool empty() const noexcept { return x1 <= x0 || y1 <= y0; }
  bool contains(int x, int y) const noexcept { return x >= x0 && x < x1 && y >= y0 && y < y1; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Fraction removed from each of the four sides, in [0, 0.25].
struct CropSpec {
  double frac = 0.0;
};

struct GridSpec {
  int scale = 1;
  double overlap_frac = 0.0;  // in [0, 0.5)
};

/// Tile identity independent of the crop that produced it, so tiles from
/// differently cropped members line up when bagging.
struct TileKey {
  int scale = 1;
  int row = 0;
  int col = 0;

  friend auto operator<=>(const TileKey&, const TileKey&) = default;
};

struct TileRef {
  TileKey key;
  Rect rect;
};

/// Removes floor(frac * width) from left and right and floor(frac * height)
/// from top and bottom.
Rect central_crop(const Rect& image, CropSpec spec);

/// scale x scale tiles in row-major order. Boundaries sit at floor(i * W / n)
/// so tiles partition the region exactly when overlap is zero; with overlap
/// each tile grows by floor(overlap_frac * tile size) per side, clamped to the
/// region.
std::vector<TileRef> tile_grid(const Rect& region, GridSpec spec);

/// 4-adjacent in-grid neighbours at the same scale, ordered up, left, right,
/// down.
std::vector<TileKey> neighbors(const TileKey& tile, GridSpec spec);

}  // namespace quadrat
