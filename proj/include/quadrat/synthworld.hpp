#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quadrat/geometry.hpp"
#include "quadrat/taxonomy.hpp"

namespace quadrat {

enum class PrototypeKind { orthogonal, sphere };

struct SynthConfig {
  int n_species = 50;
  int n_genera = 10;
  int n_families = 3;
  int grid_cells = 20;  // cells per quadrat side
  int feature_dim = 16;
  double noise_sigma = 0.0;
  int richness_min = 4;
  int richness_max = 4;
  int n_quadrats = 20;
  int quadrats_per_transect = 5;
  // Patch boundaries snap to multiples of this many cells. With
  // grid_cells / patch_align == n, every tile of an n x n grid is single-species.
  int patch_align = 1;
  PrototypeKind prototypes = PrototypeKind::sphere;
  double logit_scale = 10.0;
  std::uint64_t seed = 0;

  /// Throws infeasible_config / invalid_config.
  void validate() const;
};

struct Patch {
  Rect rect;
  SpeciesId species{};
};

/// A synthetic quadrat: a grid of per-cell feature vectors.
struct Quadrat {
  std::string quadrat_id;
  std::string transect_id;
  int grid_cells = 0;
  int feature_dim = 0;
  std::vector<double> cells;       // row-major: (y * grid_cells + x) * feature_dim + d
  std::vector<SpeciesId> truth;    // ascending
  std::vector<Patch> patches;

  Rect bounds() const noexcept { return {0, 0, grid_cells, grid_cells}; }
  std::span<const double> cell(int x, int y) const;
};

/// One classification head: a linear map, or linear -> ReLU -> linear.
struct Head {
  std::string id;
  Level level = Level::species;
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  std::optional<Eigen::MatrixXd> w2;
  std::optional<Eigen::VectorXd> b2;

  std::size_t in_dim() const noexcept { return static_cast<std::size_t>(w1.cols()); }
  std::size_t out_dim() const noexcept {
    return static_cast<std::size_t>(w2 ? w2->rows() : w1.rows());
  }
  int layers() const noexcept { return w2 ? 2 : 1; }
};

/// Head variants keyed by id. Several variants per level allow Hydra-style
/// recombination over the shared tile features.
class HeadRegistry {
 public:
  void add(Head head);
  const Head& get(const std::string& id) const;
  bool contains(const std::string& id) const { return heads_.contains(id); }
  std::vector<std::string> ids(Level level) const;
  const std::map<std::string, Head>& all() const noexcept { return heads_; }

 private:
  std::map<std::string, Head> heads_;
};

struct SynthWorld {
  TaxonomyTable taxonomy;
  std::vector<Quadrat> quadrats;
  HeadRegistry heads;
  Eigen::MatrixXd prototypes;  // n_species x feature_dim, unit rows
};

/// Pure function of the config: taxonomy, prototypes, heads, then quadrats.
SynthWorld gen_world(const SynthConfig& cfg);

/// Mean of the cell feature vectors inside `rect`.
std::vector<double> tile_features(const Quadrat& q, const Rect& rect);

std::vector<double> head_logits(const Head& head, std::span<const double> features);

}  // namespace quadrat
