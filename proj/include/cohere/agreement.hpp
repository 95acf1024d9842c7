#pragma once

#include <cstdint>
#include <vector>

#include "cohere/corpus.hpp"
#include "cohere/metrics.hpp"
#include "cohere/rng.hpp"

namespace cohere {

struct AgreementReport {
  double icc_mean = 0.0;
  double icc_std = 0.0;
  double kappa_mean = 0.0;
  double kappa_std = 0.0;
  int repeats = 0;
  RaterSource rater_source = RaterSource::Expert;
};

// Simulates two pseudo-annotators per repeat: for each item, two distinct
// raters' labels are drawn; quadratic weighted kappa and ICC are computed on
// the resulting pairs. The reported ICC is the average-measure form over the
// two pseudo-annotators, (MSB - MSW) / MSB, i.e. the Spearman-Brown transform
// of the single-measure value. Repeats with a degenerate statistic are
// skipped.
inline AgreementReport simulate_agreement(const std::vector<std::vector<int>>& ratings, int repeats,
                                          std::uint64_t seed,
                                          RaterSource source = RaterSource::Expert) {
  if (ratings.empty()) throw DomainError("simulate_agreement: no items");
  for (const auto& item : ratings)
    if (item.size() < 2) throw DomainError("simulate_agreement: every item needs >= 2 ratings");

  Rng rng(seed);
  std::vector<double> iccs, kappas;
  iccs.reserve(repeats);
  kappas.reserve(repeats);
  const int n = static_cast<int>(ratings.size());
  std::vector<int> a(n), b(n);
  std::vector<std::pair<double, double>> pairs(n);
  for (int rep = 0; rep < repeats; ++rep) {
    for (int i = 0; i < n; ++i) {
      const int m = static_cast<int>(ratings[i].size());
      const int first = static_cast<int>(rng.next_below(m));
      int second = static_cast<int>(rng.next_below(m - 1));
      if (second >= first) ++second;
      a[i] = ratings[i][first];
      b[i] = ratings[i][second];
      pairs[i] = {static_cast<double>(a[i]), static_cast<double>(b[i])};
    }
    if (const auto v = icc(pairs)) iccs.push_back(2.0 * *v / (1.0 + *v));
    if (const auto v = weighted_kappa(a, b, 3)) kappas.push_back(*v);
  }

  AgreementReport report;
  report.repeats = repeats;
  report.rater_source = source;
  report.icc_mean = mean_of(iccs);
  report.icc_std = stddev_of(iccs);
  report.kappa_mean = mean_of(kappas);
  report.kappa_std = stddev_of(kappas);
  return report;
}

}  // namespace cohere
