#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace quadrat {

/// Species ids as they appear in the CSV files.
using LabelSet = std::set<std::int64_t>;

struct GroundTruthEntry {
  std::string transect_id;
  LabelSet species;
};

using GroundTruthTable = std::map<std::string, GroundTruthEntry>;

struct SubmissionRow {
  std::string quadrat_id;
  std::vector<std::int64_t> species_ids;  // ascending, no duplicates

  friend bool operator==(const SubmissionRow&, const SubmissionRow&) = default;
};

struct ScoreReport {
  double final_score = 0.0;
  std::map<std::string, double> per_transect;
  std::map<std::string, double> per_quadrat;
  std::vector<std::string> warnings;
};

/// 2 |pred & truth| / (|pred| + |truth|); 0 when pred is empty.
double quadrat_f1(const LabelSet& pred, const LabelSet& truth);

/// Mean over transects of the mean per-quadrat F1 within each transect.
/// Quadrats without a prediction score 0 and produce a warning; predictions
/// for unknown quadrats are ignored with a warning; duplicates throw.
ScoreReport score(std::span<const SubmissionRow> preds, const GroundTruthTable& truth);

GroundTruthTable parse_groundtruth(std::istream& in);
GroundTruthTable load_groundtruth(const std::filesystem::path& path);
std::string format_groundtruth(const GroundTruthTable& truth);

std::vector<SubmissionRow> parse_submission(std::istream& in);
std::vector<SubmissionRow> load_submission(const std::filesystem::path& path);
/// Rows sorted by quadrat id.
std::string format_submission(std::span<const SubmissionRow> rows);

/// JSON report with sorted keys.
std::string format_report(const ScoreReport& report);

}  // namespace quadrat
