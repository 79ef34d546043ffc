#include "quadrat/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "quadrat/error.hpp"
#include "quadrat/pipeline.hpp"
#include "quadrat/world_io.hpp"

namespace quadrat {

namespace fs = std::filesystem;

namespace {

constexpr int kExitError = 2;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

int cmd_gen(const std::string& config, const fs::path& out_dir, std::optional<std::uint64_t> seed,
            std::ostream& out) {
  auto kv = KeyValueConfig::load(config);
  if (seed) kv.set("seed", std::to_string(*seed));
  const auto cfg = synth_config_from(kv);
  const auto world = gen_world(cfg);
  write_world(out_dir, world);

  std::size_t planted = 0;
  for (const auto& q : world.quadrats) planted += q.truth.size();
  std::set<std::string> transects;
  for (const auto& q : world.quadrats) transects.insert(q.transect_id);
  out << "species=" << world.taxonomy.n_species() << " genera=" << world.taxonomy.n_genera()
      << " families=" << world.taxonomy.n_families() << "\n";
  out << "quadrats=" << world.quadrats.size() << " transects=" << transects.size()
      << " mean_richness=" << fixed(static_cast<double>(planted) / world.quadrats.size(), 4) << "\n";
  return 0;
}

// Everything `infer` and `sweep` need from a world directory.
struct LoadedWorld {
  TaxonomyTable taxonomy;
  HeadRegistry heads;
  std::vector<Quadrat> quadrats;
  std::vector<QuadratInput> inputs;
};

// Features are read only for quadrats the cache cannot fully serve.
LoadedWorld load_world(const fs::path& dir, const RunConfig& cfg, const LogitCache& cache) {
  LoadedWorld w;
  w.taxonomy = load_taxonomy(dir / "taxonomy.csv");
  w.heads = load_heads(dir / "heads.txt");
  const auto index = load_quadrat_index(dir);
  if (index.empty()) throw Error(ErrorKind::empty_input, "world has no quadrats");

  std::vector<std::optional<Quadrat>> loaded(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& meta = index[i];
    bool complete = true;
    const Rect bounds{0, 0, meta.grid_cells, meta.grid_cells};
    for (const auto& spec : cfg.models) {
      for (double crop : cfg.crop_fracs) {
        const auto region = central_crop(bounds, CropSpec{crop});
        for (int scale : cfg.scales) {
          for (const auto& t : tile_grid(region, GridSpec{scale, cfg.overlap_frac})) {
            CacheKey key{spec.id(), meta.quadrat_id, crop_label(crop), t.key.scale, t.key.row, t.key.col};
            if (!cache.find(key)) complete = false;
          }
        }
      }
    }
    if (!complete) loaded[i] = load_quadrat_features(dir, meta);
  }
  for (auto& q : loaded) {
    if (q) w.quadrats.push_back(std::move(*q));
  }
  std::size_t next = 0;
  for (const auto& meta : index) {
    QuadratInput in{meta.quadrat_id, meta.transect_id, nullptr, {0, 0, meta.grid_cells, meta.grid_cells}};
    if (next < w.quadrats.size() && w.quadrats[next].quadrat_id == meta.quadrat_id) {
      in.features = &w.quadrats[next++];
    }
    w.inputs.push_back(in);
  }
  return w;
}

struct Inferred {
  LoadedWorld world;
  RunConfig cfg;
  std::vector<CandidateSet> candidates;
};

Inferred infer_candidates(const std::string& config, const fs::path& world_dir,
                          const std::optional<fs::path>& cache_path) {
  Inferred r;
  r.cfg = RunConfig::from_config(KeyValueConfig::load(config));
  LogitCache cache;
  if (cache_path && fs::exists(*cache_path)) cache = LogitCache::load(*cache_path);
  const auto before = cache.size();
  r.world = load_world(world_dir, r.cfg, cache);
  const auto models = compose_models(r.world.heads, r.cfg);
  r.candidates = infer_all(r.world.inputs, r.cfg, r.world.taxonomy, models,
                           cache_path ? &cache : nullptr, exec_from_env());
  if (cache_path && cache.size() != before) write_file_atomic(*cache_path, cache.format());
  return r;
}

int cmd_infer(const std::string& config, const fs::path& world_dir, const fs::path& submission,
              const std::optional<fs::path>& cache_path, std::ostream& out) {
  auto inferred = infer_candidates(config, world_dir, cache_path);
  const auto result = select(std::move(inferred.candidates), inferred.world.inputs, inferred.cfg);
  const auto rows = to_submission(result.predictions, inferred.world.taxonomy);
  write_file_atomic(submission, format_submission(rows));
  out << "quadrats=" << rows.size() << " threshold=" << format_double(result.threshold, 17)
      << " mean_len=" << fixed(result.achieved_mean_len, 4) << "\n";
  return 0;
}

int cmd_eval(const fs::path& submission, const fs::path& groundtruth,
             const std::optional<fs::path>& report_path, std::ostream& out, std::ostream& err) {
  const auto truth = load_groundtruth(groundtruth);
  const auto rows = load_submission(submission);
  const auto report = score(rows, truth);
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  out << "final " << fixed(report.final_score, 5) << "\n";
  for (const auto& [tid, v] : report.per_transect) out << "transect " << tid << " " << fixed(v, 5) << "\n";
  if (report_path) write_file_atomic(*report_path, format_report(report));
  return 0;
}

int cmd_sweep(const std::string& config, const fs::path& world_dir, const std::string& targets_text,
              const std::optional<fs::path>& groundtruth, const std::optional<fs::path>& cache_path,
              const std::optional<fs::path>& table_path, std::ostream& out) {
  auto targets = parse_double_list(targets_text, ',', "targets");
  if (targets.empty()) throw Error(ErrorKind::invalid_config, "no targets given");
  // Validate before the expensive inference.
  const auto probe = RunConfig::from_config(KeyValueConfig::load(config));
  for (double t : targets) {
    if (!(t >= static_cast<double>(probe.selection.min_len))) {
      throw Error(ErrorKind::invalid_config, "target " + format_double(t, 17) + " below min_len " +
                                                 std::to_string(probe.selection.min_len));
    }
  }
  const auto truth = load_groundtruth(groundtruth.value_or(world_dir / "groundtruth.csv"));
  auto inferred = infer_candidates(config, world_dir, cache_path);
  const auto rows = sweep(inferred.candidates, inferred.world.inputs, inferred.cfg, targets,
                          inferred.world.taxonomy, truth);

  std::string table = "target,threshold,mean_len,score\n";
  for (const auto& r : rows) {
    if (r.attainable) {
      table += format_double(r.target, 12) + "," + format_double(r.threshold, 17) + "," +
               fixed(r.achieved_mean_len, 6) + "," + fixed(r.score, 6) + "\n";
    } else {
      table += format_double(r.target, 12) + ",unattainable,,\n";
    }
  }
  out << table;
  if (table_path) write_file_atomic(*table_path, table);
  return 0;
}

int cmd_taxonomy_validate(const fs::path& path, std::ostream& out) {
  const auto t = load_taxonomy(path);
  out << "species=" << t.n_species() << " genera=" << t.n_genera() << " families=" << t.n_families()
      << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-label quadrat species inference toolkit"};
  app.name("quadrat");
  app.require_subcommand(1);

  std::string config;
  std::string world;
  std::string out_path;
  std::string cache;
  std::string submission;
  std::string groundtruth;
  std::string report;
  std::string targets;
  std::string table;
  std::string taxonomy;
  std::optional<std::uint64_t> seed;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic world");
  gen->add_option("--config", config, "SynthConfig key=value file")->required();
  gen->add_option("--out", out_path, "Output directory")->required();
  gen->add_option("--seed", seed, "Override the config seed");

  auto* infer = app.add_subcommand("infer", "Run the inference pipeline and write a submission");
  infer->add_option("--config", config, "Run configuration file")->required();
  infer->add_option("--world", world, "World directory")->required();
  infer->add_option("--out", out_path, "Submission CSV")->required();
  infer->add_option("--cache", cache, "Logit cache CSV (read and updated)");

  auto* eval = app.add_subcommand("eval", "Score a submission against ground truth");
  eval->add_option("--submission", submission)->required();
  eval->add_option("--groundtruth", groundtruth)->required();
  eval->add_option("--report", report, "JSON report output");

  auto* sweep_cmd = app.add_subcommand("sweep", "Calibrate and score several mean-length targets");
  sweep_cmd->add_option("--config", config)->required();
  sweep_cmd->add_option("--world", world)->required();
  sweep_cmd->add_option("--targets", targets, "Comma-separated targets")->required();
  sweep_cmd->add_option("--groundtruth", groundtruth, "Defaults to <world>/groundtruth.csv");
  sweep_cmd->add_option("--cache", cache);
  sweep_cmd->add_option("--out", table, "Table CSV output");

  auto* validate = app.add_subcommand("taxonomy-validate", "Load and validate a taxonomy CSV");
  validate->add_option("path", taxonomy)->required();

  auto opt = [](const std::string& s) -> std::optional<fs::path> {
    if (s.empty()) return std::nullopt;
    return fs::path(s);
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[usage]: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (gen->parsed()) return cmd_gen(config, out_path, seed, out);
    if (infer->parsed()) return cmd_infer(config, world, out_path, opt(cache), out);
    if (eval->parsed()) return cmd_eval(submission, groundtruth, opt(report), out, err);
    if (sweep_cmd->parsed()) {
      return cmd_sweep(config, world, targets, opt(groundtruth), opt(cache), opt(table), out);
    }
    if (validate->parsed()) return cmd_taxonomy_validate(taxonomy, out);
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error[internal]: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace quadrat
