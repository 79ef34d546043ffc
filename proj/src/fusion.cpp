#include "quadrat/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quadrat/error.hpp"

namespace quadrat {

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) throw Error(ErrorKind::empty_input, "log_softmax of an empty vector");
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - peak);
  const double lse = peak + std::log(sum);
  std::vector<double> out(logits.size());
  std::transform(logits.begin(), logits.end(), out.begin(), [lse](double v) { return v - lse; });
  return out;
}

namespace {

void check_length(const std::vector<double>& v, std::size_t expected, Level level) {
  if (v.size() != expected) {
    throw Error(ErrorKind::dimension_mismatch,
                std::string(to_string(level)) + " logits have length " + std::to_string(v.size()) +
                    ", taxonomy expects " + std::to_string(expected));
  }
}

}  // namespace

FusedScores fuse(const TileLogits& tile, const TaxonomyTable& taxonomy) {
  check_length(tile.species, taxonomy.n_species(), Level::species);
  FusedScores out{tile.tile, log_softmax(tile.species)};

  if (tile.genus) {
    check_length(*tile.genus, taxonomy.n_genera(), Level::genus);
    const auto lg = log_softmax(*tile.genus);
    const auto s2g = taxonomy.species_to_genus();
    for (std::size_t s = 0; s < out.score.size(); ++s) out.score[s] += lg[index(s2g[s])];
  }
  if (tile.family) {
    check_length(*tile.family, taxonomy.n_families(), Level::family);
    const auto lf = log_softmax(*tile.family);
    const auto s2g = taxonomy.species_to_genus();
    const auto g2f = taxonomy.genus_to_family();
    for (std::size_t s = 0; s < out.score.size(); ++s) {
      out.score[s] += lf[index(g2f[index(s2g[s])])];
    }
  }
  return out;
}

Top1 argmax_top1(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorKind::empty_input, "argmax of an empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return {make_id<SpeciesId>(best), scores[best]};
}

}  // namespace quadrat
