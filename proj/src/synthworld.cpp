#include "quadrat/synthworld.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include "quadrat/error.hpp"

namespace quadrat {

namespace {

using Rng = std::mt19937_64;

// Independent stream per (seed, purpose, index) so that generation order of
// one part never shifts another.
Rng stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

enum Purpose : std::uint64_t { kTaxonomy = 1, kPrototypes, kHeadVariant, kQuadrat };

// Surjective random map from `n` items onto `m` buckets: the first m items of
// a random permutation claim one bucket each, the rest pick uniformly.
std::vector<int> surjective_assignment(int n, int m, Rng& rng) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<int> pick(0, m - 1);
  std::vector<int> bucket(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    bucket[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i < m ? i : pick(rng);
  }
  return bucket;
}

TaxonomyTable random_taxonomy(const SynthConfig& cfg) {
  auto rng = stream(cfg.seed, kTaxonomy);
  const auto s2g = surjective_assignment(cfg.n_species, cfg.n_genera, rng);
  const auto g2f = surjective_assignment(cfg.n_genera, cfg.n_families, rng);
  std::vector<TaxonomyRow> rows;
  rows.reserve(static_cast<std::size_t>(cfg.n_species));
  for (int s = 0; s < cfg.n_species; ++s) {
    const int g = s2g[static_cast<std::size_t>(s)];
    rows.push_back({s, g, g2f[static_cast<std::size_t>(g)]});
  }
  return TaxonomyTable::from_rows(rows);
}

Eigen::MatrixXd random_prototypes(const SynthConfig& cfg) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(cfg.n_species, cfg.feature_dim);
  if (cfg.prototypes == PrototypeKind::orthogonal) {
    for (int s = 0; s < cfg.n_species; ++s) p(s, s) = 1.0;
    return p;
  }
  auto rng = stream(cfg.seed, kPrototypes);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int s = 0; s < cfg.n_species; ++s) {
    for (int d = 0; d < cfg.feature_dim; ++d) p(s, d) = normal(rng);
    const double norm = p.row(s).norm();
    if (norm > 0.0) p.row(s) /= norm;
  }
  return p;
}

void normalize_rows(Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double norm = m.row(r).norm();
    if (norm > 0.0) m.row(r) /= norm;
  }
}

// Unit direction of the mean prototype of each group's members.
Eigen::MatrixXd group_centroids(const Eigen::MatrixXd& prototypes,
                                const std::vector<std::size_t>& group_of, std::size_t n_groups) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_groups), prototypes.cols());
  for (std::size_t s = 0; s < group_of.size(); ++s) {
    c.row(static_cast<Eigen::Index>(group_of[s])) += prototypes.row(static_cast<Eigen::Index>(s));
  }
  normalize_rows(c);
  return c;
}

Head linear_head(std::string id, Level level, Eigen::MatrixXd w) {
  Head h;
  h.id = std::move(id);
  h.level = level;
  h.b1 = Eigen::VectorXd::Zero(w.rows());
  h.w1 = std::move(w);
  return h;
}

// Species detectors -> ReLU -> sum over each group's members. The bias keeps
// weak (noise-level) detector responses out of the group evidence.
Head rectified_head(std::string id, Level level, const Eigen::MatrixXd& detectors, double bias,
                    const std::vector<std::size_t>& group_of, std::size_t n_groups) {
  Head h;
  h.id = std::move(id);
  h.level = level;
  h.w1 = detectors;
  h.b1 = Eigen::VectorXd::Constant(detectors.rows(), bias);
  Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_groups), detectors.rows());
  for (std::size_t s = 0; s < group_of.size(); ++s) {
    w2(static_cast<Eigen::Index>(group_of[s]), static_cast<Eigen::Index>(s)) = 1.0;
  }
  h.w2 = std::move(w2);
  h.b2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_groups));
  return h;
}

HeadRegistry make_heads(const SynthConfig& cfg, const TaxonomyTable& tax,
                        const Eigen::MatrixXd& prototypes) {
  const double c = cfg.logit_scale;
  HeadRegistry reg;
  reg.add(linear_head("sp1", Level::species, c * prototypes));

  // A second species head from perturbed prototypes, like an independently
  // trained run of the same architecture.
  auto rng = stream(cfg.seed, kHeadVariant);
  std::normal_distribution<double> normal(0.0, 0.1);
  Eigen::MatrixXd perturbed = prototypes;
  for (Eigen::Index r = 0; r < perturbed.rows(); ++r) {
    for (Eigen::Index d = 0; d < perturbed.cols(); ++d) perturbed(r, d) += normal(rng);
  }
  normalize_rows(perturbed);
  reg.add(linear_head("sp1b", Level::species, c * perturbed));

  std::vector<std::size_t> genus_of(tax.n_species());
  std::vector<std::size_t> family_of(tax.n_species());
  for (std::size_t s = 0; s < tax.n_species(); ++s) {
    genus_of[s] = index(tax.genus_of(make_id<SpeciesId>(s)));
    family_of[s] = index(tax.family_of(make_id<SpeciesId>(s)));
  }
  const Eigen::MatrixXd genus_dirs = group_centroids(prototypes, genus_of, tax.n_genera());
  const Eigen::MatrixXd family_dirs = group_centroids(prototypes, family_of, tax.n_families());
  const Eigen::MatrixXd detectors = c * prototypes;
  reg.add(linear_head("g1", Level::genus, c * genus_dirs));
  reg.add(rectified_head("g2", Level::genus, detectors, -0.5 * c, genus_of, tax.n_genera()));
  reg.add(linear_head("f1", Level::family, c * family_dirs));
  reg.add(rectified_head("f2", Level::family, detectors, -0.5 * c, family_of, tax.n_families()));
  return reg;
}

// Recursive axis-aligned split of a units x units square into k patches.
// Always splits the largest splittable patch along its longer side.
std::vector<Rect> split_patches(int units, int k, Rng& rng) {
  std::vector<Rect> patches{{0, 0, units, units}};
  while (static_cast<int>(patches.size()) < k) {
    int best = -1;
    long best_area = 0;
    for (int i = 0; i < static_cast<int>(patches.size()); ++i) {
      const auto& r = patches[static_cast<std::size_t>(i)];
      const long area = static_cast<long>(r.width()) * r.height();
      if ((r.width() >= 2 || r.height() >= 2) && area > best_area) {
        best = i;
        best_area = area;
      }
    }
    if (best < 0) throw Error(ErrorKind::infeasible_config, "cannot split quadrat into enough patches");
    Rect r = patches[static_cast<std::size_t>(best)];
    Rect a = r;
    Rect b = r;
    if (r.width() >= r.height()) {
      std::uniform_int_distribution<int> cut(r.x0 + 1, r.x1 - 1);
      a.x1 = b.x0 = cut(rng);
    } else {
      std::uniform_int_distribution<int> cut(r.y0 + 1, r.y1 - 1);
      a.y1 = b.y0 = cut(rng);
    }
    patches[static_cast<std::size_t>(best)] = a;
    patches.push_back(b);
  }
  return patches;
}

std::string padded(const char* prefix, int value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%05d", prefix, value);
  return buf;
}

Quadrat make_quadrat(const SynthConfig& cfg, const Eigen::MatrixXd& prototypes, int q) {
  auto rng = stream(cfg.seed, kQuadrat, static_cast<std::uint64_t>(q));
  std::uniform_int_distribution<int> richness(cfg.richness_min, cfg.richness_max);
  const int k = richness(rng);

  std::vector<int> all(static_cast<std::size_t>(cfg.n_species));
  std::iota(all.begin(), all.end(), 0);
  // Partial Fisher-Yates: the first k entries become the planted species.
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, cfg.n_species - 1);
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
  }

  const int units = cfg.grid_cells / cfg.patch_align;
  const auto unit_patches = split_patches(units, k, rng);

  Quadrat out;
  out.quadrat_id = padded("Q", q);
  out.transect_id = padded("T", q / cfg.quadrats_per_transect);
  out.grid_cells = cfg.grid_cells;
  out.feature_dim = cfg.feature_dim;
  out.cells.assign(static_cast<std::size_t>(cfg.grid_cells) * cfg.grid_cells * cfg.feature_dim, 0.0);

  const int a = cfg.patch_align;
  for (int i = 0; i < k; ++i) {
    const auto& u = unit_patches[static_cast<std::size_t>(i)];
    Patch p{{u.x0 * a, u.y0 * a, u.x1 * a, u.y1 * a}, make_id<SpeciesId>(static_cast<std::size_t>(all[static_cast<std::size_t>(i)]))};
    out.patches.push_back(p);
    out.truth.push_back(p.species);
  }
  std::sort(out.truth.begin(), out.truth.end());

  std::normal_distribution<double> noise(0.0, 1.0);
  for (const auto& p : out.patches) {
    const auto proto = prototypes.row(static_cast<Eigen::Index>(index(p.species)));
    for (int y = p.rect.y0; y < p.rect.y1; ++y) {
      for (int x = p.rect.x0; x < p.rect.x1; ++x) {
        double* cell = out.cells.data() +
                       (static_cast<std::size_t>(y) * cfg.grid_cells + x) * cfg.feature_dim;
        for (int d = 0; d < cfg.feature_dim; ++d) {
          cell[d] = proto(d);
          if (cfg.noise_sigma > 0.0) cell[d] += cfg.noise_sigma * noise(rng);
        }
      }
    }
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::infeasible_config, msg); };
  if (n_families < 1) fail("n_families must be >= 1");
  if (n_genera < n_families) fail("n_genera must be >= n_families");
  if (n_species < n_genera) fail("n_species must be >= n_genera");
  if (feature_dim < 1) fail("feature_dim must be >= 1");
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  if (grid_cells < 1) fail("grid_cells must be >= 1");
  if (patch_align < 1 || grid_cells % patch_align != 0) {
    fail("patch_align must be >= 1 and divide grid_cells");
  }
  if (richness_min < 1 || richness_max < richness_min) fail("richness range must satisfy 1 <= min <= max");
  if (richness_max > n_species) fail("richness exceeds n_species");
  const long units = grid_cells / patch_align;
  if (richness_max > units * units) fail("richness exceeds the number of patch units");
  if (n_quadrats < 1) fail("n_quadrats must be >= 1");
  if (quadrats_per_transect < 1) fail("quadrats_per_transect must be >= 1");
  if (prototypes == PrototypeKind::orthogonal && feature_dim < n_species) {
    fail("orthogonal prototypes need feature_dim >= n_species");
  }
  if (!(logit_scale > 0.0)) fail("logit_scale must be > 0");
}

std::span<const double> Quadrat::cell(int x, int y) const {
  const auto offset = (static_cast<std::size_t>(y) * grid_cells + x) * feature_dim;
  return {cells.data() + offset, static_cast<std::size_t>(feature_dim)};
}

void HeadRegistry::add(Head head) {
  auto id = head.id;
  heads_.insert_or_assign(std::move(id), std::move(head));
}

const Head& HeadRegistry::get(const std::string& id) const {
  auto it = heads_.find(id);
  if (it == heads_.end()) throw Error(ErrorKind::unknown_id, "unknown head '" + id + "'");
  return it->second;
}

std::vector<std::string> HeadRegistry::ids(Level level) const {
  std::vector<std::string> out;
  for (const auto& [id, h] : heads_) {
    if (h.level == level) out.push_back(id);
  }
  return out;
}

SynthWorld gen_world(const SynthConfig& cfg) {
  cfg.validate();
  SynthWorld world;
  world.taxonomy = random_taxonomy(cfg);
  world.prototypes = random_prototypes(cfg);
  world.heads = make_heads(cfg, world.taxonomy, world.prototypes);
  world.quadrats.reserve(static_cast<std::size_t>(cfg.n_quadrats));
  for (int q = 0; q < cfg.n_quadrats; ++q) {
    world.quadrats.push_back(make_quadrat(cfg, world.prototypes, q));
  }
  return world;
}

std::vector<double> tile_features(const Quadrat& q, const Rect& rect) {
  std::vector<double> mean(static_cast<std::size_t>(q.feature_dim), 0.0);
  if (rect.empty()) return mean;
  for (int y = rect.y0; y < rect.y1; ++y) {
    for (int x = rect.x0; x < rect.x1; ++x) {
      const auto c = q.cell(x, y);
      for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += c[d];
    }
  }
  const double n = static_cast<double>(rect.width()) * rect.height();
  for (auto& v : mean) v /= n;
  return mean;
}

std::vector<double> head_logits(const Head& head, std::span<const double> features) {
  if (features.size() != head.in_dim()) {
    throw Error(ErrorKind::dimension_mismatch,
                "head '" + head.id + "' expects " + std::to_string(head.in_dim()) +
                    " features, got " + std::to_string(features.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> f(features.data(),
                                            static_cast<Eigen::Index>(features.size()));
  Eigen::VectorXd h = head.w1 * f + head.b1;
  if (head.w2) {
    h = (*head.w2 * h.cwiseMax(0.0) + *head.b2).eval();
  }
  return {h.data(), h.data() + h.size()};
}

}  // namespace quadrat
