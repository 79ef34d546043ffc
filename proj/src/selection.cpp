#include "quadrat/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "quadrat/error.hpp"

namespace quadrat {

void SelectionConfig::validate() const {
  if (min_logit && target_mean_len) {
    throw Error(ErrorKind::invalid_config, "min_logit and target_mean_len are mutually exclusive");
  }
  if (min_len < 1) throw Error(ErrorKind::invalid_config, "min_len must be >= 1");
  if (max_len && *max_len < min_len) throw Error(ErrorKind::invalid_config, "max_len must be >= min_len");
  if (target_mean_len && !(*target_mean_len >= static_cast<double>(min_len))) {
    throw Error(ErrorKind::invalid_config, "target_mean_len must be >= min_len");
  }
  if (merge_k && *merge_k < 1) throw Error(ErrorKind::invalid_config, "merge_k must be >= 1");
  if (bisect_iters < 1) throw Error(ErrorKind::invalid_config, "bisect_iters must be >= 1");
}

CandidateSet merge_top1(std::string quadrat_id, std::span<const Top1> contributions) {
  if (contributions.empty()) {
    throw Error(ErrorKind::empty_input, "no tiles for quadrat " + quadrat_id);
  }
  CandidateSet out{std::move(quadrat_id), {}};
  for (const auto& c : contributions) {
    auto [it, inserted] = out.entries.emplace(c.species, c.score);
    if (!inserted) it->second = std::max(it->second, c.score);
  }
  return out;
}

CandidateSet collect_candidates(std::string quadrat_id, std::span<const TileLogits> tiles,
                                const TaxonomyTable& taxonomy, const SelectionConfig& cfg) {
  std::vector<Top1> top;
  top.reserve(tiles.size());
  for (const auto& t : tiles) {
    top.push_back(cfg.channel == Channel::fused ? tile_top1(fuse(t, taxonomy))
                                                : argmax_top1(t.species));
  }
  return merge_top1(std::move(quadrat_id), top);
}

CandidateSet zscore_normalize(const CandidateSet& c) {
  if (c.entries.size() < 2) return c;
  const double n = static_cast<double>(c.entries.size());
  double mean = 0.0;
  for (const auto& [_, v] : c.entries) mean += v;
  mean /= n;
  double var = 0.0;
  for (const auto& [_, v] : c.entries) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  CandidateSet out{c.quadrat_id, {}};
  for (const auto& [s, v] : c.entries) out.entries.emplace(s, sd > 0.0 ? (v - mean) / sd : 0.0);
  return out;
}

namespace {

// Candidates by descending score, ties by ascending id.
std::vector<std::pair<SpeciesId, double>> ranked(const CandidateSet& c) {
  std::vector<std::pair<SpeciesId, double>> r(c.entries.begin(), c.entries.end());
  std::stable_sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return r;
}

std::size_t selected_count(const std::vector<double>& descending, double tau, const SelectionConfig& cfg) {
  // Number of scores strictly above tau.
  auto above = static_cast<std::size_t>(
      std::lower_bound(descending.begin(), descending.end(), tau, std::greater<>()) - descending.begin());
  std::size_t n = above;
  if (cfg.max_len) n = std::min(n, *cfg.max_len);
  n = std::max(n, std::min(cfg.min_len, descending.size()));
  return n;
}

}  // namespace

PredictionSet apply_threshold(const CandidateSet& c, double tau, const SelectionConfig& cfg) {
  const auto order = ranked(c);
  std::vector<double> scores;
  scores.reserve(order.size());
  for (const auto& [_, v] : order) scores.push_back(v);
  const auto n = selected_count(scores, tau, cfg);

  PredictionSet out{c.quadrat_id, {}};
  for (std::size_t i = 0; i < n; ++i) out.species.push_back(order[i].first);
  std::sort(out.species.begin(), out.species.end());
  return out;
}

namespace {

std::vector<std::vector<double>> descending_scores(std::span<const CandidateSet> corpus) {
  std::vector<std::vector<double>> out;
  out.reserve(corpus.size());
  for (const auto& c : corpus) {
    std::vector<double> v;
    v.reserve(c.entries.size());
    for (const auto& [_, s] : c.entries) v.push_back(s);
    std::sort(v.begin(), v.end(), std::greater<>());
    out.push_back(std::move(v));
  }
  return out;
}

double mean_len_sorted(const std::vector<std::vector<double>>& corpus, double tau, const SelectionConfig& cfg) {
  std::size_t total = 0;
  for (const auto& scores : corpus) total += selected_count(scores, tau, cfg);
  return static_cast<double>(total) / static_cast<double>(corpus.size());
}

}  // namespace

double mean_len(std::span<const CandidateSet> corpus, double tau, const SelectionConfig& cfg) {
  if (corpus.empty()) throw Error(ErrorKind::empty_input, "empty corpus");
  return mean_len_sorted(descending_scores(corpus), tau, cfg);
}

double bisect_threshold(std::span<const CandidateSet> corpus, double target, const SelectionConfig& cfg) {
  if (corpus.empty()) throw Error(ErrorKind::empty_input, "empty corpus");
  const auto sorted = descending_scores(corpus);

  double lo_score = INFINITY;
  double hi_score = -INFINITY;
  for (const auto& scores : sorted) {
    if (scores.empty()) continue;
    hi_score = std::max(hi_score, scores.front());
    lo_score = std::min(lo_score, scores.back());
  }
  if (!std::isfinite(lo_score)) throw Error(ErrorKind::empty_input, "corpus has no candidates");

  // Slack for targets like 4/3 that are written as decimals.
  constexpr double kSlack = 1e-12;
  auto reaches = [&](double tau) { return mean_len_sorted(sorted, tau, cfg) >= target - kSlack; };

  double lo = lo_score - 1.0;
  double hi = hi_score;
  if (!reaches(lo)) {
    throw Error(ErrorKind::unattainable_target,
                "target mean length " + std::to_string(target) + " exceeds the maximum " +
                    std::to_string(mean_len_sorted(sorted, lo, cfg)));
  }
  if (reaches(hi)) return hi;
  for (int i = 0; i < cfg.bisect_iters; ++i) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    (reaches(mid) ? lo : hi) = mid;
  }
  return lo;
}

std::vector<PredictionSet> metadata_merge(std::span<const PredictionSet> preds,
                                          const std::map<std::string, std::string>& groups, int k) {
  std::map<std::string, std::map<SpeciesId, int>> counts;
  for (const auto& p : preds) {
    auto g = groups.find(p.quadrat_id);
    if (g == groups.end()) {
      throw Error(ErrorKind::missing_group, "quadrat " + p.quadrat_id + " has no group");
    }
    for (auto s : p.species) ++counts[g->second][s];
  }
  std::vector<PredictionSet> out;
  out.reserve(preds.size());
  for (const auto& p : preds) {
    std::set<SpeciesId> merged(p.species.begin(), p.species.end());
    for (const auto& [s, n] : counts[groups.at(p.quadrat_id)]) {
      if (n > k) merged.insert(s);
    }
    out.push_back({p.quadrat_id, {merged.begin(), merged.end()}});
  }
  return out;
}

}  // namespace quadrat
