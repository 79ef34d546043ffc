#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace quadrat {

// Dense per-level identifiers, 0..n-1, assigned at load time in ascending
// order of the external ids found in the file.
enum class SpeciesId : std::int32_t {};
enum class GenusId : std::int32_t {};
enum class FamilyId : std::int32_t {};

template <typename Id>
constexpr std::size_t index(Id id) noexcept {
  return static_cast<std::size_t>(static_cast<std::int32_t>(id));
}

template <typename Id>
constexpr Id make_id(std::size_t i) noexcept {
  return static_cast<Id>(static_cast<std::int32_t>(i));
}

enum class Level { species, genus, family };

std::string_view to_string(Level level);

/// One row of the taxonomy CSV, in external ids.
struct TaxonomyRow {
  std::int64_t species = 0;
  std::int64_t genus = 0;
  std::int64_t family = 0;
};

/// Species -> genus -> family functional maps. Immutable after construction.
class TaxonomyTable {
 public:
  TaxonomyTable() = default;

  /// Builds and validates a table from rows in external ids. Identical
  /// duplicate rows are tolerated; contradictory ones throw.
  static TaxonomyTable from_rows(std::span<const TaxonomyRow> rows);

  std::size_t n_species() const noexcept { return species_ext_.size(); }
  std::size_t n_genera() const noexcept { return genus_ext_.size(); }
  std::size_t n_families() const noexcept { return family_ext_.size(); }
  std::size_t count(Level level) const noexcept;

  GenusId genus_of(SpeciesId s) const;
  FamilyId family_of(SpeciesId s) const;
  FamilyId family_of_genus(GenusId g) const;

  // Dense <-> external id translation.
  std::int64_t external_species(SpeciesId s) const;
  SpeciesId species_from_external(std::int64_t ext) const;
  std::int64_t external_genus(GenusId g) const;
  std::int64_t external_family(FamilyId f) const;

  /// Rows sorted by external species id.
  std::vector<TaxonomyRow> rows() const;

  // Raw dense maps, indexed by SpeciesId / GenusId.
  std::span<const GenusId> species_to_genus() const noexcept { return species_to_genus_; }
  std::span<const FamilyId> genus_to_family() const noexcept { return genus_to_family_; }

  friend bool operator==(const TaxonomyTable&, const TaxonomyTable&) = default;

 private:
  std::vector<std::int64_t> species_ext_;
  std::vector<std::int64_t> genus_ext_;
  std::vector<std::int64_t> family_ext_;
  std::vector<GenusId> species_to_genus_;
  std::vector<FamilyId> genus_to_family_;
};

/// Parses the `species_id,genus_id,family_id` CSV. An empty family field is
/// allowed on a row as long as some other row gives that genus a family.
TaxonomyTable parse_taxonomy(std::istream& in);
TaxonomyTable load_taxonomy(const std::filesystem::path& path);

void write_taxonomy(std::ostream& out, const TaxonomyTable& table);

}  // namespace quadrat
