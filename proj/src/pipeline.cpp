#include "quadrat/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <mutex>
#include <thread>

#include "quadrat/error.hpp"

namespace quadrat {

namespace {

std::optional<std::size_t> parse_max_len(const std::string& text) {
  if (text == "inf" || text == "unbounded" || text.empty()) return std::nullopt;
  const auto v = parse_int(text, "max_len");
  if (v < 1) throw Error(ErrorKind::invalid_config, "max_len must be >= 1");
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(ErrorKind::invalid_config, key + ": expected true/false, got '" + text + "'");
}

}  // namespace

void RunConfig::validate() const {
  if (crop_fracs.empty()) throw Error(ErrorKind::invalid_config, "crop_pct must list at least one crop");
  if (scales.empty()) throw Error(ErrorKind::invalid_config, "scales must list at least one scale");
  for (double c : crop_fracs) {
    if (!(c >= 0.0 && c <= 0.25)) throw Error(ErrorKind::invalid_config, "crop fraction outside [0, 0.25]");
  }
  for (int s : scales) {
    if (s < 1) throw Error(ErrorKind::invalid_config, "scales must be >= 1");
  }
  if (!(overlap_frac >= 0.0 && overlap_frac < 0.5)) {
    throw Error(ErrorKind::invalid_config, "overlap must be in [0, 0.5)");
  }
  if (models.empty()) throw Error(ErrorKind::invalid_config, "models must list at least one model");
  if (kernel_w && !(*kernel_w >= 0.0)) throw Error(ErrorKind::invalid_config, "kernel_w must be >= 0");
  selection.validate();
}

RunConfig RunConfig::from_config(const KeyValueConfig& kv) {
  RunConfig cfg;
  if (auto v = kv.get("crop_pct")) {
    cfg.crop_fracs.clear();
    for (double pct : parse_double_list(*v, ',', "crop_pct")) cfg.crop_fracs.push_back(pct / 100.0);
  }
  if (auto v = kv.get("scales")) {
    cfg.scales.clear();
    for (auto s : parse_int_list(*v, ',', "scales")) cfg.scales.push_back(static_cast<int>(s));
  }
  if (auto v = kv.get("overlap")) cfg.overlap_frac = parse_double(*v, "overlap");
  if (auto v = kv.get("models")) {
    cfg.models.clear();
    for (const auto& m : split(*v, ',')) cfg.models.push_back(HydraSpec::parse(m));
  }
  if (auto v = kv.get("kernel_w")) cfg.kernel_w = parse_double(*v, "kernel_w");

  auto& sel = cfg.selection;
  if (auto v = kv.get("channel")) {
    if (*v == "fused") {
      sel.channel = Channel::fused;
    } else if (*v == "raw") {
      sel.channel = Channel::raw;
    } else {
      throw Error(ErrorKind::invalid_config, "channel must be fused or raw");
    }
  }
  if (auto v = kv.get("min_logit")) sel.min_logit = parse_double(*v, "min_logit");
  if (auto v = kv.get("target_mean_len")) sel.target_mean_len = parse_double(*v, "target_mean_len");
  if (auto v = kv.get("max_len")) sel.max_len = parse_max_len(*v);
  if (auto v = kv.get("min_len")) {
    const auto n = parse_int(*v, "min_len");
    if (n < 1) throw Error(ErrorKind::invalid_config, "min_len must be >= 1");
    sel.min_len = static_cast<std::size_t>(n);
  }
  if (auto v = kv.get("zscore")) sel.zscore = parse_bool(*v, "zscore");
  if (auto v = kv.get("merge_k")) sel.merge_k = static_cast<int>(parse_int(*v, "merge_k"));
  if (auto v = kv.get("bisect_iters")) sel.bisect_iters = static_cast<int>(parse_int(*v, "bisect_iters"));

  if (auto unused = kv.unused_keys(); !unused.empty()) {
    throw Error(ErrorKind::invalid_config, "unknown config key '" + unused.front() + "'");
  }
  cfg.validate();
  return cfg;
}

std::string crop_label(double frac) { return format_double(frac * 100.0, kCacheDigits); }

// --- logit cache -----------------------------------------------------------

const TileLogits* LogitCache::find(const CacheKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void LogitCache::insert(const CacheKey& key, TileLogits logits) {
  entries_.insert_or_assign(key, std::move(logits));
}

namespace {

constexpr std::string_view kCacheHeader = "model_id,quadrat_id,crop_pct,scale,row,col,level,values";

void append_values(std::string& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += format_double(values[i], kCacheDigits);
  }
}

void round_all(std::vector<double>& v) {
  for (auto& x : v) x = round_significant(x, kCacheDigits);
}

void round_all(TileLogits& t) {
  round_all(t.species);
  if (t.genus) round_all(*t.genus);
  if (t.family) round_all(*t.family);
}

}  // namespace

LogitCache LogitCache::parse(std::istream& in) {
  LogitCache cache;
  CsvReader reader(in, kCacheHeader);
  while (auto f = reader.next()) {
    if (f->size() != 8) throw Error(ErrorKind::parse, reader.where() + ": expected 8 fields");
    const auto& w = reader.where();
    CacheKey key{(*f)[0], (*f)[1], (*f)[2], static_cast<int>(parse_int((*f)[3], w)),
                 static_cast<int>(parse_int((*f)[4], w)), static_cast<int>(parse_int((*f)[5], w))};
    auto values = parse_double_list((*f)[7], ';', w);
    auto& entry = cache.entries_[key];
    entry.tile = TileKey{key.scale, key.row, key.col};
    const auto& level = (*f)[6];
    if (level == "species") {
      entry.species = std::move(values);
    } else if (level == "genus") {
      entry.genus = std::move(values);
    } else if (level == "family") {
      entry.family = std::move(values);
    } else {
      throw Error(ErrorKind::parse, w + ": unknown level '" + level + "'");
    }
  }
  for (const auto& [key, entry] : cache.entries_) {
    if (entry.species.empty()) {
      throw Error(ErrorKind::parse, "cache entry for " + key.model_id + "/" + key.quadrat_id +
                                        " has no species row");
    }
  }
  return cache;
}

LogitCache LogitCache::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return parse(in);
}

std::string LogitCache::format() const {
  std::string out(kCacheHeader);
  out += '\n';
  auto row = [&](const CacheKey& k, std::string_view level, const std::vector<double>& values) {
    out += k.model_id + ',' + k.quadrat_id + ',' + k.crop_pct + ',' + std::to_string(k.scale) + ',' +
           std::to_string(k.row) + ',' + std::to_string(k.col) + ',';
    out += level;
    out += ',';
    append_values(out, values);
    out += '\n';
  };
  for (const auto& [k, t] : entries_) {
    row(k, "species", t.species);
    if (t.genus) row(k, "genus", *t.genus);
    if (t.family) row(k, "family", *t.family);
  }
  return out;
}

// --- inference ---------------------------------------------------------------

std::vector<QuadratInput> inputs_from(std::span<const Quadrat> quadrats) {
  std::vector<QuadratInput> out;
  out.reserve(quadrats.size());
  for (const auto& q : quadrats) out.push_back({q.quadrat_id, q.transect_id, &q, q.bounds()});
  return out;
}

QuadratInference infer_quadrat(const QuadratInput& q, const RunConfig& cfg,
                               const TaxonomyTable& taxonomy, std::span<const HydraModel> models,
                               const LogitCache* cache) {
  if (models.empty()) throw Error(ErrorKind::invalid_config, "no models");
  QuadratInference result;
  std::vector<ModelOutput> members;
  members.reserve(cfg.crop_fracs.size() * models.size());

  for (double crop : cfg.crop_fracs) {
    const auto label = crop_label(crop);
    const Rect region = central_crop(q.bounds, CropSpec{crop});
    std::vector<TileRef> tiles;
    for (int scale : cfg.scales) {
      auto grid = tile_grid(region, GridSpec{scale, cfg.overlap_frac});
      tiles.insert(tiles.end(), grid.begin(), grid.end());
    }
    // Tile features are shared by every model of this crop; computed lazily.
    std::vector<std::optional<std::vector<double>>> features(tiles.size());

    for (const auto& model : models) {
      ModelOutput out{model.id() + "@" + label, {}};
      for (std::size_t i = 0; i < tiles.size(); ++i) {
        const auto& t = tiles[i];
        CacheKey key{model.id(), q.quadrat_id, label, t.key.scale, t.key.row, t.key.col};
        const TileLogits* hit = cache ? cache->find(key) : nullptr;
        TileLogits logits;
        if (hit) {
          logits = *hit;
        } else {
          if (!q.features) {
            throw Error(ErrorKind::io, "no features or cached logits for quadrat " + q.quadrat_id);
          }
          if (!features[i]) features[i] = tile_features(*q.features, t.rect);
          logits = model.logits(t.key, *features[i]);
          round_all(logits);
          result.computed.emplace_back(key, logits);
        }
        out.tiles.emplace(t.key, std::move(logits));
      }
      if (cfg.kernel_w) out.tiles = kernel_smooth(out.tiles, *cfg.kernel_w);
      members.push_back(std::move(out));
    }
  }

  const ModelOutput bagged = bag(members);
  std::vector<TileLogits> tiles;
  tiles.reserve(bagged.tiles.size());
  for (const auto& [_, t] : bagged.tiles) tiles.push_back(t);
  result.candidates = collect_candidates(q.quadrat_id, tiles, taxonomy, cfg.selection);
  return result;
}

ExecOptions exec_from_env() {
  ExecOptions exec;
  exec.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("QUADRAT_WORKERS")) {
    const auto n = parse_int(env, "QUADRAT_WORKERS");
    if (n < 1) throw Error(ErrorKind::invalid_config, "QUADRAT_WORKERS must be >= 1");
    exec.workers = static_cast<int>(n);
  }
  return exec;
}

std::vector<CandidateSet> infer_all(std::span<const QuadratInput> corpus, const RunConfig& cfg,
                                    const TaxonomyTable& taxonomy, std::span<const HydraModel> models,
                                    LogitCache* cache, ExecOptions exec) {
  cfg.validate();
  if (corpus.empty()) throw Error(ErrorKind::empty_input, "empty corpus");
  std::vector<std::optional<QuadratInference>> results(corpus.size());
  std::mutex failure_mutex;
  std::exception_ptr failure;
  std::size_t failure_index = corpus.size();
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    while (true) {
      const auto i = next++;
      if (i >= corpus.size()) return;
      try {
        results[i] = infer_quadrat(corpus[i], cfg, taxonomy, models, cache);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (i < failure_index) {
          failure_index = i;
          failure = std::current_exception();
        }
      }
    }
  };

  const auto workers = std::min(static_cast<std::size_t>(std::max(1, exec.workers)), corpus.size());
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<CandidateSet> out;
  out.reserve(corpus.size());
  for (auto& r : results) {
    if (cache) {
      for (auto& [key, logits] : r->computed) cache->insert(key, std::move(logits));
    }
    out.push_back(std::move(r->candidates));
  }
  return out;
}

RunResult select(std::vector<CandidateSet> candidates, std::span<const QuadratInput> corpus,
                 const RunConfig& cfg) {
  const auto& sel = cfg.selection;
  sel.validate();
  RunResult result;
  if (sel.zscore) {
    for (auto& c : candidates) c = zscore_normalize(c);
  }
  if (sel.target_mean_len) {
    result.threshold = bisect_threshold(candidates, *sel.target_mean_len, sel);
  } else if (sel.min_logit) {
    result.threshold = *sel.min_logit;
  }
  result.predictions.reserve(candidates.size());
  for (const auto& c : candidates) result.predictions.push_back(apply_threshold(c, result.threshold, sel));

  if (sel.merge_k) {
    std::map<std::string, std::string> groups;
    for (const auto& q : corpus) groups[q.quadrat_id] = q.transect_id;
    result.predictions = metadata_merge(result.predictions, groups, *sel.merge_k);
  }
  std::size_t total = 0;
  for (const auto& p : result.predictions) total += p.species.size();
  result.achieved_mean_len =
      result.predictions.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(result.predictions.size());
  result.candidates = std::move(candidates);
  return result;
}

RunResult run(std::span<const QuadratInput> corpus, const RunConfig& cfg,
              const TaxonomyTable& taxonomy, std::span<const HydraModel> models, LogitCache* cache,
              ExecOptions exec) {
  return select(infer_all(corpus, cfg, taxonomy, models, cache, exec), corpus, cfg);
}

std::vector<HydraModel> compose_models(const HeadRegistry& registry, const RunConfig& cfg) {
  std::vector<HydraModel> models;
  for (const auto& spec : cfg.models) models.push_back(compose_hydra(registry, spec));
  return models;
}

std::vector<SubmissionRow> to_submission(std::span<const PredictionSet> preds,
                                         const TaxonomyTable& taxonomy) {
  std::vector<SubmissionRow> rows;
  rows.reserve(preds.size());
  for (const auto& p : preds) {
    SubmissionRow row{p.quadrat_id, {}};
    for (auto s : p.species) row.species_ids.push_back(taxonomy.external_species(s));
    std::sort(row.species_ids.begin(), row.species_ids.end());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> sweep(const std::vector<CandidateSet>& candidates,
                            std::span<const QuadratInput> corpus, const RunConfig& cfg,
                            std::vector<double> targets, const TaxonomyTable& taxonomy,
                            const GroundTruthTable& truth) {
  std::sort(targets.begin(), targets.end());
  std::vector<SweepRow> rows;
  for (double target : targets) {
    RunConfig c = cfg;
    c.selection.min_logit.reset();
    c.selection.target_mean_len = target;
    c.validate();
    SweepRow row{target, false, 0.0, 0.0, 0.0};
    try {
      auto result = select(candidates, corpus, c);
      const auto sub = to_submission(result.predictions, taxonomy);
      row.attainable = true;
      row.threshold = result.threshold;
      row.achieved_mean_len = result.achieved_mean_len;
      row.score = score(sub, truth).final_score;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::unattainable_target) throw;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace quadrat
