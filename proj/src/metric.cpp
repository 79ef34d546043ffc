#include "quadrat/metric.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "quadrat/error.hpp"
#include "quadrat/io.hpp"

namespace quadrat {

double quadrat_f1(const LabelSet& pred, const LabelSet& truth) {
  if (pred.empty() || truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (auto s : pred) hits += truth.count(s);
  return 2.0 * static_cast<double>(hits) / static_cast<double>(pred.size() + truth.size());
}

ScoreReport score(std::span<const SubmissionRow> preds, const GroundTruthTable& truth) {
  ScoreReport report;
  std::map<std::string, LabelSet> by_quadrat;
  for (const auto& row : preds) {
    if (!truth.contains(row.quadrat_id)) {
      report.warnings.push_back("prediction for unknown quadrat " + row.quadrat_id + " ignored");
      continue;
    }
    auto [_, inserted] = by_quadrat.emplace(row.quadrat_id, LabelSet(row.species_ids.begin(), row.species_ids.end()));
    if (!inserted) throw Error(ErrorKind::duplicate, "duplicate prediction for quadrat " + row.quadrat_id);
  }
  std::sort(report.warnings.begin(), report.warnings.end());

  std::map<std::string, std::vector<double>> transect_f1;
  for (const auto& [qid, entry] : truth) {
    double f1 = 0.0;
    if (auto it = by_quadrat.find(qid); it != by_quadrat.end()) {
      f1 = quadrat_f1(it->second, entry.species);
    } else {
      report.warnings.push_back("no prediction for quadrat " + qid + ", scored 0");
    }
    report.per_quadrat[qid] = f1;
    transect_f1[entry.transect_id].push_back(f1);
  }
  if (transect_f1.empty()) return report;

  double total = 0.0;
  for (const auto& [tid, f1s] : transect_f1) {
    double sum = 0.0;
    for (double v : f1s) sum += v;
    const double mean = sum / static_cast<double>(f1s.size());
    report.per_transect[tid] = mean;
    total += mean;
  }
  report.final_score = total / static_cast<double>(transect_f1.size());
  return report;
}

namespace {

std::string join_ids(const auto& ids) {
  std::string out;
  bool first = true;
  for (auto id : ids) {
    if (!first) out += ';';
    out += std::to_string(id);
    first = false;
  }
  return out;
}

}  // namespace

GroundTruthTable parse_groundtruth(std::istream& in) {
  GroundTruthTable out;
  CsvReader reader(in, "quadrat_id,transect_id,species_ids");
  while (auto f = reader.next()) {
    if (f->size() != 3) throw Error(ErrorKind::parse, reader.where() + ": expected 3 fields");
    auto ids = parse_int_list((*f)[2], ';', reader.where());
    if (ids.empty()) throw Error(ErrorKind::parse, reader.where() + ": empty true species set");
    GroundTruthEntry e{(*f)[1], LabelSet(ids.begin(), ids.end())};
    if (!out.emplace((*f)[0], std::move(e)).second) {
      throw Error(ErrorKind::duplicate, reader.where() + ": duplicate quadrat " + (*f)[0]);
    }
  }
  return out;
}

GroundTruthTable load_groundtruth(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return parse_groundtruth(in);
}

std::string format_groundtruth(const GroundTruthTable& truth) {
  std::string out = "quadrat_id,transect_id,species_ids\n";
  for (const auto& [qid, e] : truth) out += qid + "," + e.transect_id + "," + join_ids(e.species) + "\n";
  return out;
}

std::vector<SubmissionRow> parse_submission(std::istream& in) {
  std::vector<SubmissionRow> out;
  CsvReader reader(in, "quadrat_id,species_ids");
  while (auto f = reader.next()) {
    if (f->size() != 2) throw Error(ErrorKind::parse, reader.where() + ": expected 2 fields");
    auto ids = parse_int_list((*f)[1], ';', reader.where());
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw Error(ErrorKind::parse, reader.where() + ": repeated species id");
    }
    out.push_back({(*f)[0], std::move(ids)});
  }
  return out;
}

std::vector<SubmissionRow> load_submission(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return parse_submission(in);
}

std::string format_submission(std::span<const SubmissionRow> rows) {
  std::vector<const SubmissionRow*> sorted;
  for (const auto& r : rows) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->quadrat_id < b->quadrat_id; });
  std::string out = "quadrat_id,species_ids\n";
  for (const auto* r : sorted) out += r->quadrat_id + "," + join_ids(r->species_ids) + "\n";
  return out;
}

std::string format_report(const ScoreReport& report) {
  nlohmann::json j;
  j["final"] = report.final_score;
  j["per_transect"] = report.per_transect;
  j["per_quadrat"] = report.per_quadrat;
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

}  // namespace quadrat
