#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<double> softmax(const std::vector<double>& v) {
  double peak = v[0];
  for (double x : v) peak = std::max(peak, x);
  std::vector<double> p(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += (p[i] = std::exp(v[i] - peak));
  for (auto& x : p) x /= sum;
  return p;
}

/// Enumerates every (species, genus, family) triple, keeps those consistent
/// with the hierarchy, and returns log of the best probability product per
/// species. `genus_of` / `family_of_genus` are plain index arrays.
inline std::vector<double> fused_by_enumeration(const std::vector<double>& species,
                                                const std::vector<double>* genus,
                                                const std::vector<double>* family,
                                                const std::vector<int>& genus_of,
                                                const std::vector<int>& family_of_genus) {
  const auto ps = softmax(species);
  const std::vector<double> pg = genus ? softmax(*genus) : std::vector<double>(family_of_genus.size(), 1.0);
  int n_families = 0;
  for (int f : family_of_genus) n_families = std::max(n_families, f + 1);
  const std::vector<double> pf = family ? softmax(*family) : std::vector<double>(static_cast<std::size_t>(n_families), 1.0);

  std::vector<double> best(species.size(), -INFINITY);
  for (std::size_t s = 0; s < ps.size(); ++s) {
    for (std::size_t g = 0; g < pg.size(); ++g) {
      for (std::size_t f = 0; f < pf.size(); ++f) {
        const bool valid = genus_of[s] == static_cast<int>(g) && family_of_genus[g] == static_cast<int>(f);
        if (!valid) continue;
        best[s] = std::max(best[s], std::log(ps[s] * pg[g] * pf[f]));
      }
    }
  }
  return best;
}

struct Quadrat {
  std::string id;
  std::string transect;
  std::set<std::int64_t> truth;
  std::set<std::int64_t> pred;
};

/// (1/N) sum_i (1/T_i) sum_j F1_ij evaluated literally.
inline double transect_macro_f1(const std::vector<Quadrat>& quadrats) {
  std::vector<std::string> transects;
  for (const auto& q : quadrats) {
    if (std::find(transects.begin(), transects.end(), q.transect) == transects.end()) {
      transects.push_back(q.transect);
    }
  }
  long double outer = 0.0L;
  for (const auto& t : transects) {
    long double inner = 0.0L;
    int count = 0;
    for (const auto& q : quadrats) {
      if (q.transect != t) continue;
      ++count;
      int tp = 0;
      for (auto s : q.pred) tp += q.truth.count(s) ? 1 : 0;
      const int fp = static_cast<int>(q.pred.size()) - tp;
      const int fn = static_cast<int>(q.truth.size()) - tp;
      // F1 = 2TP / (2TP + FP + FN); defined as 0 when there are no positives at all.
      const int denom = 2 * tp + fp + fn;
      inner += denom == 0 ? 0.0L : 2.0L * tp / denom;
    }
    outer += inner / count;
  }
  return static_cast<double>(outer / transects.size());
}

/// Prediction size for one quadrat at threshold tau, by direct counting.
inline std::size_t kept(const std::vector<double>& scores, double tau, std::size_t min_len,
                        std::size_t max_len) {
  std::size_t above = 0;
  for (double s : scores) above += s > tau ? 1 : 0;
  above = std::min(above, max_len);
  return std::max(above, std::min(min_len, scores.size()));
}

/// All achievable mean lengths, one per candidate-score threshold plus one
/// below every score, paired with the threshold that realises them.
inline std::vector<std::pair<double, double>> step_levels(const std::vector<std::vector<double>>& corpus,
                                                          std::size_t min_len, std::size_t max_len) {
  std::set<double> taus;
  double lowest = INFINITY;
  for (const auto& q : corpus) {
    for (double s : q) {
      taus.insert(s);
      lowest = std::min(lowest, s);
    }
  }
  taus.insert(lowest - 1.0);
  std::vector<std::pair<double, double>> out;
  for (double tau : taus) {
    std::size_t total = 0;
    for (const auto& q : corpus) total += kept(q, tau, min_len, max_len);
    out.emplace_back(tau, static_cast<double>(total) / static_cast<double>(corpus.size()));
  }
  return out;
}

}  // namespace oracle
