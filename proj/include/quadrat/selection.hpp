#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadrat/fusion.hpp"
#include "quadrat/taxonomy.hpp"

namespace quadrat {

enum class Channel { fused, raw };

struct SelectionConfig {
  Channel channel = Channel::fused;
  std::optional<double> min_logit;
  std::optional<double> target_mean_len;
  std::optional<std::size_t> max_len;  // nullopt = unbounded
  std::size_t min_len = 1;
  bool zscore = false;
  std::optional<int> merge_k;
  int bisect_iters = 64;

  /// Throws invalid_config on contradictions.
  void validate() const;
};

/// Per-quadrat species candidates; each score is the best top-1 score that
/// species reached on any tile.
struct CandidateSet {
  std::string quadrat_id;
  std::map<SpeciesId, double> entries;

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

struct PredictionSet {
  std::string quadrat_id;
  std::vector<SpeciesId> species;  // ascending

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

/// Max-merges per-tile top-1 contributions.
CandidateSet merge_top1(std::string quadrat_id, std::span<const Top1> contributions);

/// Takes each tile's top-1 on the configured channel (fused log-scores or raw
/// species logits) and max-merges them.
CandidateSet collect_candidates(std::string quadrat_id, std::span<const TileLogits> tiles,
                                const TaxonomyTable& taxonomy, const SelectionConfig& cfg);

/// Replaces scores by (x - mean) / population std. Sets with fewer than two
/// entries are returned unchanged; zero spread maps every score to 0.
CandidateSet zscore_normalize(const CandidateSet& c);

/// Keeps scores strictly above `tau`, caps to max_len by descending score
/// (ties: lower id), then backfills from the best excluded candidates up to
/// min_len.
PredictionSet apply_threshold(const CandidateSet& c, double tau, const SelectionConfig& cfg);

/// Mean prediction size over the corpus at threshold `tau`.
double mean_len(std::span<const CandidateSet> corpus, double tau, const SelectionConfig& cfg);

/// Largest threshold (to bisection precision) whose mean prediction size is
/// still >= target, i.e. the smallest achievable step level not below target.
double bisect_threshold(std::span<const CandidateSet> corpus, double target, const SelectionConfig& cfg);

/// Within each group, species predicted in more than k members are added to
/// every member.
std::vector<PredictionSet> metadata_merge(std::span<const PredictionSet> preds,
                                          const std::map<std::string, std::string>& groups, int k);

}  // namespace quadrat
