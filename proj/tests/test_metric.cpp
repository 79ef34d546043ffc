#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "quadrat/error.hpp"
#include "quadrat/metric.hpp"

using namespace quadrat;

namespace {

SubmissionRow row(std::string id, std::vector<std::int64_t> s) { return {std::move(id), std::move(s)}; }

struct Instance {
  GroundTruthTable truth;
  std::vector<SubmissionRow> preds;
  std::vector<oracle::Quadrat> literal;
};

Instance random_instance(std::mt19937_64& rng) {
  Instance inst;
  const int n_transects = 1 + static_cast<int>(rng() % 5);
  int q = 0;
  for (int t = 0; t < n_transects; ++t) {
    const int n_quadrats = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n_quadrats; ++i, ++q) {
      oracle::Quadrat lit{"q" + std::to_string(q), "t" + std::to_string(t), {}, {}};
      const int n_truth = 1 + static_cast<int>(rng() % 4);
      while (static_cast<int>(lit.truth.size()) < n_truth) lit.truth.insert(static_cast<std::int64_t>(rng() % 10));
      const int n_pred = 1 + static_cast<int>(rng() % 6);
      while (static_cast<int>(lit.pred.size()) < n_pred) lit.pred.insert(static_cast<std::int64_t>(rng() % 10));
      inst.truth[lit.id] = {lit.transect, lit.truth};
      inst.preds.push_back(row(lit.id, {lit.pred.begin(), lit.pred.end()}));
      inst.literal.push_back(lit);
    }
  }
  return inst;
}

}  // namespace

TEST_CASE("per-quadrat F1") {
  CHECK(quadrat_f1({1, 2, 3}, {1, 2, 3}) == 1.0);
  CHECK(quadrat_f1({1, 2}, {3, 4}) == 0.0);
  CHECK(quadrat_f1({1, 2}, {2, 3}) == 0.5);
  CHECK(quadrat_f1({}, {2, 3}) == 0.0);
  CHECK(quadrat_f1({1, 2, 3, 4}, {1}) == doctest::Approx(0.4));
}

TEST_CASE("macro average over transects") {
  GroundTruthTable truth{{"a", {"t", {1, 2}}}, {"b", {"t", {1}}}};
  const std::vector<SubmissionRow> preds{row("a", {2, 3}), row("b", {1})};
  const auto r = score(preds, truth);
  CHECK(r.final_score == 0.75);
  CHECK(r.per_quadrat.at("a") == 0.5);
  CHECK(r.per_transect.at("t") == 0.75);

  // A large transect does not outweigh a small one.
  GroundTruthTable two{{"a", {"t1", {1}}}, {"b", {"t1", {1}}}, {"c", {"t1", {1}}}, {"d", {"t2", {1}}}};
  const std::vector<SubmissionRow> mixed{row("a", {1}), row("b", {1}), row("c", {1}), row("d", {2})};
  CHECK(score(mixed, two).final_score == 0.5);

  const std::vector<SubmissionRow> perfect{row("a", {1}), row("b", {1}), row("c", {1}), row("d", {1})};
  CHECK(score(perfect, two).final_score == 1.0);
  CHECK(score(perfect, two).warnings.empty());
}

TEST_CASE("missing and unknown quadrats warn") {
  GroundTruthTable truth{{"a", {"t", {1}}}, {"b", {"t", {1}}}};
  const std::vector<SubmissionRow> only_a{row("a", {1}), row("zzz", {1})};
  const auto r = score(only_a, truth);
  CHECK(r.final_score == 0.5);
  CHECK(r.per_quadrat.at("b") == 0.0);
  CHECK(r.warnings.size() == 2);
  CHECK(r.per_quadrat.count("zzz") == 0);
}

TEST_CASE("duplicate predictions are rejected") {
  GroundTruthTable truth{{"a", {"t", {1}}}};
  const std::vector<SubmissionRow> dup{row("a", {1}), row("a", {2})};
  try {
    score(dup, truth);
    FAIL("expected duplicate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::duplicate);
  }
}

TEST_CASE("score matches literal evaluation") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(rng);
    const double got = score(inst.preds, inst.truth).final_score;
    CHECK(std::abs(got - oracle::transect_macro_f1(inst.literal)) <= 1e-12);
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }
}

TEST_CASE("score ignores submission row order") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = random_instance(rng);
    const double base = score(inst.preds, inst.truth).final_score;
    std::shuffle(inst.preds.begin(), inst.preds.end(), rng);
    CHECK(score(inst.preds, inst.truth).final_score == base);
  }
}

TEST_CASE("ground truth and submission files round trip") {
  GroundTruthTable truth{{"Q1", {"T1", {3, 7}}}, {"Q2", {"T1", {7}}}, {"Q3", {"T2", {1, 2, 9}}}};
  std::istringstream gt(format_groundtruth(truth));
  const auto back = parse_groundtruth(gt);
  REQUIRE(back.size() == 3);
  CHECK(back.at("Q3").transect_id == "T2");
  CHECK(back.at("Q3").species == LabelSet{1, 2, 9});

  const std::vector<SubmissionRow> rows{row("Q2", {7}), row("Q1", {3, 4})};
  const auto text = format_submission(rows);
  CHECK(text.find("Q1") < text.find("Q2"));
  std::istringstream sub(text);
  const auto parsed = parse_submission(sub);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0] == row("Q1", {3, 4}));
  CHECK(parsed[1] == row("Q2", {7}));
}

TEST_CASE("malformed files are parse errors") {
  std::istringstream bad_header("quadrat,species\nQ1,1\n");
  CHECK_THROWS_AS(parse_submission(bad_header), Error);
  std::istringstream bad_id("quadrat_id,species_ids\nQ1,1;x\n");
  CHECK_THROWS_AS(parse_submission(bad_id), Error);
  std::istringstream bad_gt("quadrat_id,transect_id,species_ids\nQ1,T1\n");
  CHECK_THROWS_AS(parse_groundtruth(bad_gt), Error);
}

TEST_CASE("report is JSON with the final score") {
  GroundTruthTable truth{{"a", {"t", {1}}}};
  const std::vector<SubmissionRow> preds{row("a", {1})};
  const auto json = format_report(score(preds, truth));
  CHECK(json.find("\"final\"") != std::string::npos);
  CHECK(json.find("\"per_transect\"") != std::string::npos);
}
