#include "quadrat/ensemble.hpp"

#include <algorithm>

#include "quadrat/error.hpp"

namespace quadrat {

namespace {

// Mean over members computed from the sorted values, so the result does not
// depend on member order, and equals the common value exactly when all agree.
double canonical_mean(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  if (values.front() == values.back()) return values.front();
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

using LevelPtr = const std::vector<double>* (*)(const TileLogits&);

const std::vector<double>* species_of(const TileLogits& t) { return &t.species; }
const std::vector<double>* genus_of(const TileLogits& t) { return t.genus ? &*t.genus : nullptr; }
const std::vector<double>* family_of(const TileLogits& t) { return t.family ? &*t.family : nullptr; }

std::optional<std::vector<double>> mean_level(const std::vector<const TileLogits*>& tiles,
                                              LevelPtr level, const char* name) {
  const auto* first = level(*tiles.front());
  for (const auto* t : tiles) {
    const auto* v = level(*t);
    if ((v == nullptr) != (first == nullptr)) {
      throw Error(ErrorKind::incongruent, std::string(name) + " head present in some bag members only");
    }
    if (v && v->size() != first->size()) {
      throw Error(ErrorKind::incongruent, std::string(name) + " logits differ in length across bag members");
    }
  }
  if (!first) return std::nullopt;
  std::vector<double> out(first->size());
  std::vector<double> values(tiles.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t m = 0; m < tiles.size(); ++m) values[m] = (*level(*tiles[m]))[i];
    out[i] = canonical_mean(values);
  }
  return out;
}

}  // namespace

ModelOutput bag(std::span<const ModelOutput> members) {
  if (members.empty()) throw Error(ErrorKind::empty_input, "bag of zero models");
  if (members.size() == 1) return members.front();

  std::vector<std::string> ids;
  for (const auto& m : members) ids.push_back(m.model_id);
  std::sort(ids.begin(), ids.end());
  ModelOutput out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.model_id += (i ? "+" : "") + ids[i];

  for (const auto& m : members) {
    if (m.tiles.size() != members.front().tiles.size()) {
      throw Error(ErrorKind::incongruent, "bag members cover different tile sets");
    }
  }
  std::vector<const TileLogits*> column(members.size());
  for (const auto& [key, _] : members.front().tiles) {
    for (std::size_t m = 0; m < members.size(); ++m) {
      auto it = members[m].tiles.find(key);
      if (it == members[m].tiles.end()) {
        throw Error(ErrorKind::incongruent, "bag members cover different tile sets");
      }
      column[m] = &it->second;
    }
    TileLogits t{key, *mean_level(column, species_of, "species"),
                 mean_level(column, genus_of, "genus"), mean_level(column, family_of, "family")};
    out.tiles.emplace(key, std::move(t));
  }
  return out;
}

std::string HydraSpec::id() const {
  std::string out = species_head;
  if (genus_head || family_head) out += ":" + genus_head.value_or("");
  if (family_head) out += ":" + *family_head;
  return out;
}

HydraSpec HydraSpec::parse(std::string_view text) {
  HydraSpec spec;
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(':', start);
    parts.emplace_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (parts.size() > 3 || parts[0].empty()) {
    throw Error(ErrorKind::invalid_config, "bad model spec '" + std::string(text) +
                                               "', expected species[:genus[:family]]");
  }
  spec.species_head = parts[0];
  if (parts.size() > 1 && !parts[1].empty()) spec.genus_head = parts[1];
  if (parts.size() > 2 && !parts[2].empty()) spec.family_head = parts[2];
  return spec;
}

HydraModel compose_hydra(const HeadRegistry& registry, const HydraSpec& spec) {
  auto lookup = [&](const std::string& id, Level level) {
    const Head& h = registry.get(id);
    if (h.level != level) {
      throw Error(ErrorKind::invalid_config, "head '" + id + "' is a " +
                                                 std::string(to_string(h.level)) + " head, not " +
                                                 std::string(to_string(level)));
    }
    return &h;
  };
  HydraModel model;
  model.spec_ = spec;
  model.species_ = lookup(spec.species_head, Level::species);
  if (spec.genus_head) model.genus_ = lookup(*spec.genus_head, Level::genus);
  if (spec.family_head) model.family_ = lookup(*spec.family_head, Level::family);
  return model;
}

TileLogits HydraModel::logits(const TileKey& tile, std::span<const double> features) const {
  TileLogits out{tile, head_logits(*species_, features), std::nullopt, std::nullopt};
  if (genus_) out.genus = head_logits(*genus_, features);
  if (family_) out.family = head_logits(*family_, features);
  return out;
}

TileMap kernel_smooth(const TileMap& tiles, double weight) {
  if (!(weight >= 0.0)) throw Error(ErrorKind::invalid_config, "kernel weight must be >= 0");

  std::map<int, std::size_t> per_scale;
  for (const auto& [key, _] : tiles) {
    if (key.scale < 1 || key.row < 0 || key.col < 0 || key.row >= key.scale || key.col >= key.scale) {
      throw Error(ErrorKind::incomplete_grid, "tile outside its grid");
    }
    ++per_scale[key.scale];
  }
  for (const auto& [scale, n] : per_scale) {
    if (n != static_cast<std::size_t>(scale) * static_cast<std::size_t>(scale)) {
      throw Error(ErrorKind::incomplete_grid, "scale " + std::to_string(scale) + " has " +
                                                  std::to_string(n) + " tiles, expected " +
                                                  std::to_string(scale * scale));
    }
  }

  TileMap out = tiles;
  if (weight == 0.0) return out;
  auto add_scaled = [weight](std::vector<double>& acc, const std::vector<double>& v) {
    if (acc.size() != v.size()) {
      throw Error(ErrorKind::incongruent, "neighbouring tiles differ in logit length");
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += weight * v[i];
  };
  for (auto& [key, t] : out) {
    for (const auto& nb : neighbors(key, GridSpec{key.scale, 0.0})) {
      const auto& src = tiles.at(nb);
      add_scaled(t.species, src.species);
      if (t.genus.has_value() != src.genus.has_value() ||
          t.family.has_value() != src.family.has_value()) {
        throw Error(ErrorKind::incongruent, "neighbouring tiles carry different head levels");
      }
      if (t.genus) add_scaled(*t.genus, *src.genus);
      if (t.family) add_scaled(*t.family, *src.family);
    }
  }
  return out;
}

}  // namespace quadrat
