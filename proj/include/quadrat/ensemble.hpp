#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadrat/fusion.hpp"
#include "quadrat/geometry.hpp"
#include "quadrat/synthworld.hpp"

namespace quadrat {

using TileMap = std::map<TileKey, TileLogits>;

/// One model's logits for every tile of one quadrat.
struct ModelOutput {
  std::string model_id;
  TileMap tiles;
};

/// Element-wise mean of member logits per tile and level. Members must cover
/// the same tile keys with the same levels and lengths.
ModelOutput bag(std::span<const ModelOutput> members);

/// Head choice per taxonomy level. Genus and family may be left out, which
/// yields a species-only model.
struct HydraSpec {
  std::string species_head;
  std::optional<std::string> genus_head;
  std::optional<std::string> family_head;

  /// "species[:genus[:family]]"
  std::string id() const;
  static HydraSpec parse(std::string_view text);

  friend bool operator==(const HydraSpec&, const HydraSpec&) = default;
};

/// A model assembled from registry heads over the shared tile features. Holds
/// pointers into the registry, which must outlive it.
class HydraModel {
 public:
  std::string id() const { return spec_.id(); }
  const HydraSpec& spec() const noexcept { return spec_; }
  TileLogits logits(const TileKey& tile, std::span<const double> features) const;

 private:
  friend HydraModel compose_hydra(const HeadRegistry&, const HydraSpec&);
  HydraSpec spec_;
  const Head* species_ = nullptr;
  const Head* genus_ = nullptr;
  const Head* family_ = nullptr;
};

HydraModel compose_hydra(const HeadRegistry& registry, const HydraSpec& spec);

/// out[t] = in[t] + w * sum of in[u] over the 4-neighbours u of t, per level,
/// from unsmoothed inputs. Tiles of each scale present must form a full grid.
TileMap kernel_smooth(const TileMap& tiles, double weight);

}  // namespace quadrat
