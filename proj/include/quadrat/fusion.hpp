#pragma once

#include <optional>
#include <span>
#include <vector>

#include "quadrat/geometry.hpp"
#include "quadrat/taxonomy.hpp"

namespace quadrat {

/// Raw head outputs for one tile. Genus and family heads are optional.
struct TileLogits {
  TileKey tile;
  std::vector<double> species;
  std::optional<std::vector<double>> genus;
  std::optional<std::vector<double>> family;

  friend bool operator==(const TileLogits&, const TileLogits&) = default;
};

/// Per-species fused log-probability for one tile; every entry is <= 0.
struct FusedScores {
  TileKey tile;
  std::vector<double> score;
};

struct Top1 {
  SpeciesId species{};
  double score = 0.0;

  friend bool operator==(const Top1&, const Top1&) = default;
};

/// Numerically stable log(softmax(v)).
std::vector<double> log_softmax(std::span<const double> logits);

/// score[s] = log p_species(s) + log p_genus(genus_of(s)) + log p_family(family_of(s)).
/// Only the taxonomy-consistent triple exists for each species, so this is the
/// log of the probability product restricted to valid combinations. A missing
/// level contributes nothing.
FusedScores fuse(const TileLogits& tile, const TaxonomyTable& taxonomy);

/// Argmax with ties going to the lowest species id.
Top1 argmax_top1(std::span<const double> scores);

inline Top1 tile_top1(const FusedScores& fused) { return argmax_top1(fused.score); }

}  // namespace quadrat
