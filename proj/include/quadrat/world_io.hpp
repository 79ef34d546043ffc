#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "quadrat/io.hpp"
#include "quadrat/synthworld.hpp"

namespace quadrat {

/// Keys: n_species, n_genera, n_families, grid_cells, feature_dim,
/// noise_sigma, richness (or richness_min / richness_max), n_quadrats,
/// quadrats_per_transect, patch_align, prototypes (orthogonal|sphere),
/// logit_scale, seed.
SynthConfig synth_config_from(const KeyValueConfig& kv);

/// Writes taxonomy.csv, groundtruth.csv, quadrats.csv, quadrats/<id>.csv and
/// heads.txt under `dir`.
void write_world(const std::filesystem::path& dir, const SynthWorld& world);

struct QuadratMeta {
  std::string quadrat_id;
  std::string transect_id;
  int grid_cells = 0;
  int feature_dim = 0;
};

std::vector<QuadratMeta> load_quadrat_index(const std::filesystem::path& dir);

/// Cell features only; truth and patches are left empty.
Quadrat load_quadrat_features(const std::filesystem::path& dir, const QuadratMeta& meta);

std::string format_heads(const HeadRegistry& heads);
HeadRegistry parse_heads(std::istream& in);
HeadRegistry load_heads(const std::filesystem::path& path);

}  // namespace quadrat
