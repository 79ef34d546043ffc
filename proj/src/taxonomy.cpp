#include "quadrat/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "quadrat/error.hpp"
#include "quadrat/io.hpp"

namespace quadrat {

std::string_view to_string(Level level) {
  switch (level) {
    case Level::species: return "species";
    case Level::genus: return "genus";
    case Level::family: return "family";
  }
  return "?";
}

namespace {

struct PartialRow {
  std::int64_t species;
  std::int64_t genus;
  std::optional<std::int64_t> family;
};

std::size_t dense_index(std::span<const std::int64_t> sorted, std::int64_t ext) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), ext);
  return static_cast<std::size_t>(it - sorted.begin());
}

// Resolves rows with an optional family field into complete rows. A genus may
// get its family from any of its rows.
TaxonomyTable build(std::span<const PartialRow> rows) {
  std::map<std::int64_t, std::int64_t> g2f;
  for (const auto& row : rows) {
    if (!row.family) continue;
    auto [it, inserted] = g2f.emplace(row.genus, *row.family);
    if (!inserted && it->second != *row.family) {
      throw Error(ErrorKind::contradiction,
                  "genus " + std::to_string(row.genus) + " listed with families " +
                      std::to_string(it->second) + " and " + std::to_string(*row.family));
    }
  }
  std::vector<TaxonomyRow> full;
  full.reserve(rows.size());
  for (const auto& row : rows) {
    auto it = g2f.find(row.genus);
    if (it == g2f.end()) {
      throw Error(ErrorKind::dangling_reference,
                  "genus " + std::to_string(row.genus) + " has no family");
    }
    full.push_back({row.species, row.genus, it->second});
  }
  return TaxonomyTable::from_rows(full);
}

}  // namespace

TaxonomyTable TaxonomyTable::from_rows(std::span<const TaxonomyRow> rows) {
  std::map<std::int64_t, std::int64_t> s2g;
  std::map<std::int64_t, std::int64_t> g2f;
  for (const auto& row : rows) {
    auto [it, inserted] = s2g.emplace(row.species, row.genus);
    if (!inserted && it->second != row.genus) {
      throw Error(ErrorKind::contradiction,
                  "species " + std::to_string(row.species) + " listed with genera " +
                      std::to_string(it->second) + " and " + std::to_string(row.genus));
    }
    auto [fit, finserted] = g2f.emplace(row.genus, row.family);
    if (!finserted && fit->second != row.family) {
      throw Error(ErrorKind::contradiction,
                  "genus " + std::to_string(row.genus) + " listed with families " +
                      std::to_string(fit->second) + " and " + std::to_string(row.family));
    }
  }

  TaxonomyTable t;
  for (const auto& [s, _] : s2g) t.species_ext_.push_back(s);
  for (const auto& [g, f] : g2f) {
    t.genus_ext_.push_back(g);
    t.family_ext_.push_back(f);
  }
  std::sort(t.family_ext_.begin(), t.family_ext_.end());
  t.family_ext_.erase(std::unique(t.family_ext_.begin(), t.family_ext_.end()),
                      t.family_ext_.end());

  t.species_to_genus_.reserve(s2g.size());
  for (const auto& [s, g] : s2g) {
    t.species_to_genus_.push_back(make_id<GenusId>(dense_index(t.genus_ext_, g)));
  }
  t.genus_to_family_.reserve(g2f.size());
  for (const auto& [g, f] : g2f) {
    t.genus_to_family_.push_back(make_id<FamilyId>(dense_index(t.family_ext_, f)));
  }
  return t;
}

std::size_t TaxonomyTable::count(Level level) const noexcept {
  switch (level) {
    case Level::species: return n_species();
    case Level::genus: return n_genera();
    case Level::family: return n_families();
  }
  return 0;
}

GenusId TaxonomyTable::genus_of(SpeciesId s) const {
  if (index(s) >= species_to_genus_.size()) {
    throw Error(ErrorKind::unknown_id, "unknown species " + std::to_string(index(s)));
  }
  return species_to_genus_[index(s)];
}

FamilyId TaxonomyTable::family_of(SpeciesId s) const {
  return genus_to_family_[index(genus_of(s))];
}

FamilyId TaxonomyTable::family_of_genus(GenusId g) const {
  if (index(g) >= genus_to_family_.size()) {
    throw Error(ErrorKind::unknown_id, "unknown genus " + std::to_string(index(g)));
  }
  return genus_to_family_[index(g)];
}

std::int64_t TaxonomyTable::external_species(SpeciesId s) const {
  if (index(s) >= species_ext_.size()) {
    throw Error(ErrorKind::unknown_id, "unknown species " + std::to_string(index(s)));
  }
  return species_ext_[index(s)];
}

SpeciesId TaxonomyTable::species_from_external(std::int64_t ext) const {
  auto i = dense_index(species_ext_, ext);
  if (i == species_ext_.size() || species_ext_[i] != ext) {
    throw Error(ErrorKind::unknown_id, "unknown species id " + std::to_string(ext));
  }
  return make_id<SpeciesId>(i);
}

std::int64_t TaxonomyTable::external_genus(GenusId g) const { return genus_ext_.at(index(g)); }

std::int64_t TaxonomyTable::external_family(FamilyId f) const { return family_ext_.at(index(f)); }

std::vector<TaxonomyRow> TaxonomyTable::rows() const {
  std::vector<TaxonomyRow> out;
  out.reserve(n_species());
  for (std::size_t s = 0; s < n_species(); ++s) {
    auto g = species_to_genus_[s];
    out.push_back({species_ext_[s], genus_ext_[index(g)],
                   family_ext_[index(genus_to_family_[index(g)])]});
  }
  return out;
}

TaxonomyTable parse_taxonomy(std::istream& in) {
  std::vector<PartialRow> rows;
  CsvReader reader(in, "species_id,genus_id,family_id");
  while (auto fields = reader.next()) {
    if (fields->size() != 3) {
      throw Error(ErrorKind::parse, reader.where() + ": expected 3 fields");
    }
    PartialRow row{parse_int((*fields)[0], reader.where()),
                   parse_int((*fields)[1], reader.where()), std::nullopt};
    if (!(*fields)[2].empty()) row.family = parse_int((*fields)[2], reader.where());
    rows.push_back(row);
  }
  return build(rows);
}

TaxonomyTable load_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return parse_taxonomy(in);
}

void write_taxonomy(std::ostream& out, const TaxonomyTable& table) {
  out << "species_id,genus_id,family_id\n";
  for (const auto& r : table.rows()) {
    out << r.species << ',' << r.genus << ',' << r.family << '\n';
  }
}

}  // namespace quadrat
