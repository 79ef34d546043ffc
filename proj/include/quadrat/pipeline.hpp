#pragma once

#include <cmath>
#include <compare>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quadrat/ensemble.hpp"
#include "quadrat/io.hpp"
#include "quadrat/metric.hpp"
#include "quadrat/selection.hpp"
#include "quadrat/synthworld.hpp"
#include "quadrat/taxonomy.hpp"

namespace quadrat {

struct RunConfig {
  std::vector<double> crop_fracs{0.0};  // one bag member per crop
  std::vector<int> scales{1};
  double overlap_frac = 0.0;
  std::vector<HydraSpec> models{HydraSpec{"sp1", "g2", "f2"}};
  std::optional<double> kernel_w;
  SelectionConfig selection;

  void validate() const;

  /// Keys: crop_pct, scales, overlap, models, kernel_w, channel, min_logit,
  /// target_mean_len, max_len, min_len, zscore, merge_k, bisect_iters.
  static RunConfig from_config(const KeyValueConfig& kv);
};

/// Logit cache row identity.
struct CacheKey {
  std::string model_id;
  std::string quadrat_id;
  std::string crop_pct;
  int scale = 1;
  int row = 0;
  int col = 0;

  friend auto operator<=>(const CacheKey&, const CacheKey&) = default;
};

std::string crop_label(double frac);

/// Pre-computed per-tile logits keyed by (model, quadrat, crop, tile). Values
/// are kept at 9 significant digits, the precision of the file format.
class LogitCache {
 public:
  const TileLogits* find(const CacheKey& key) const;
  /// Last write wins.
  void insert(const CacheKey& key, TileLogits logits);
  std::size_t size() const noexcept { return entries_.size(); }

  static LogitCache parse(std::istream& in);
  static LogitCache load(const std::filesystem::path& path);
  /// `model_id,quadrat_id,crop_pct,scale,row,col,level,values`, sorted by key.
  std::string format() const;

  friend bool operator==(const LogitCache&, const LogitCache&) = default;

 private:
  std::map<CacheKey, TileLogits> entries_;
};

inline constexpr int kCacheDigits = 9;

/// What the pipeline knows about one quadrat. Features may be absent when
/// every needed tile is in the cache.
struct QuadratInput {
  std::string quadrat_id;
  std::string transect_id;
  const Quadrat* features = nullptr;
  Rect bounds;
};

std::vector<QuadratInput> inputs_from(std::span<const Quadrat> quadrats);

struct QuadratInference {
  CandidateSet candidates;
  std::vector<std::pair<CacheKey, TileLogits>> computed;  // cache misses filled in
};

/// crop -> tile at each scale -> per-model logits -> kernel smoothing per
/// scale -> bag across crops and models -> per-tile top-1 -> max-merge.
QuadratInference infer_quadrat(const QuadratInput& q, const RunConfig& cfg,
                               const TaxonomyTable& taxonomy, std::span<const HydraModel> models,
                               const LogitCache* cache = nullptr);

struct RunResult {
  std::vector<CandidateSet> candidates;
  double threshold = -INFINITY;
  double achieved_mean_len = 0.0;
  std::vector<PredictionSet> predictions;
};

struct ExecOptions {
  int workers = 1;
};

/// Worker count from QUADRAT_WORKERS, else hardware concurrency.
ExecOptions exec_from_env();

/// Per-quadrat inference, optionally writing misses back into `cache`.
std::vector<CandidateSet> infer_all(std::span<const QuadratInput> corpus, const RunConfig& cfg,
                                    const TaxonomyTable& taxonomy, std::span<const HydraModel> models,
                                    LogitCache* cache, ExecOptions exec);

/// Threshold calibration (when a target is set), selection and optional
/// metadata merge over already collected candidates.
RunResult select(std::vector<CandidateSet> candidates, std::span<const QuadratInput> corpus,
                 const RunConfig& cfg);

RunResult run(std::span<const QuadratInput> corpus, const RunConfig& cfg,
              const TaxonomyTable& taxonomy, std::span<const HydraModel> models,
              LogitCache* cache = nullptr, ExecOptions exec = {});

std::vector<HydraModel> compose_models(const HeadRegistry& registry, const RunConfig& cfg);

std::vector<SubmissionRow> to_submission(std::span<const PredictionSet> preds,
                                         const TaxonomyTable& taxonomy);

struct SweepRow {
  double target = 0.0;
  bool attainable = false;
  double threshold = 0.0;
  double achieved_mean_len = 0.0;
  double score = 0.0;
};

/// One calibrated selection per target, rows sorted by target.
std::vector<SweepRow> sweep(const std::vector<CandidateSet>& candidates,
                            std::span<const QuadratInput> corpus, const RunConfig& cfg,
                            std::vector<double> targets, const TaxonomyTable& taxonomy,
                            const GroundTruthTable& truth);

}  // namespace quadrat
