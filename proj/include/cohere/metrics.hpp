#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "cohere/errors.hpp"

namespace cohere {

template <typename T>
inline double accuracy(const std::vector<T>& pred, const std::vector<T>& gold) {
  if (pred.empty() || pred.size() != gold.size()) throw DomainError("accuracy: misaligned or empty lists");
  int correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == gold[i]) ++correct;
  return static_cast<double>(correct) / pred.size();
}

// Average ranks with ties resolved to the mean rank.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double mean_rank = 0.5 * (i + j) + 1.0;  // ranks are 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

inline std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

// Spearman's rho: Pearson correlation of average ranks. nullopt when either
// list is constant (undefined correlation).
inline std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw DomainError("spearman: lists misaligned or too short");
  return pearson(average_ranks(a), average_ranks(b));
}

struct FBetaResult {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  bool degenerate = false;  // a zero denominator was coerced to 0
};

inline FBetaResult f_beta(const std::vector<bool>& pred, const std::vector<bool>& gold, double beta) {
  if (pred.size() != gold.size()) throw DomainError("f_beta: misaligned lists");
  int tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] && gold[i]) ++tp;
    else if (pred[i] && !gold[i]) ++fp;
    else if (!pred[i] && gold[i]) ++fn;
  }
  FBetaResult r;
  if (tp + fp == 0) r.degenerate = true;
  else r.precision = static_cast<double>(tp) / (tp + fp);
  if (tp + fn == 0) r.degenerate = true;
  else r.recall = static_cast<double>(tp) / (tp + fn);
  const double b2 = beta * beta;
  const double denom = b2 * r.precision + r.recall;
  if (denom == 0.0) {
    r.degenerate = true;
    r.f = 0.0;
  } else {
    r.f = (1.0 + b2) * r.precision * r.recall / denom;
  }
  return r;
}

// Fraction of pairs whose original text outscores its permutation; ties count
// as incorrect.
inline double ordering_pair_accuracy(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw DomainError("ordering_pair_accuracy: empty pair list");
  int correct = 0;
  for (const auto& [orig, perm] : pairs)
    if (orig > perm) ++correct;
  return static_cast<double>(correct) / pairs.size();
}

// ---------------------------------------------------------------------------
// Wilcoxon one-sample signed-rank test

struct WilcoxonResult {
  double p = 1.0;
  double w_plus = 0.0;
  int n_effective = 0;
  bool degenerate = false;  // all differences zero
};

namespace metricdet {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Exact null distribution of W+ over sign patterns via subset-sum counting.
// Ranks are doubled so tied average ranks (x.5) stay integral.
inline double exact_two_sided_p(const std::vector<double>& ranks, double w_plus) {
  const int n = static_cast<int>(ranks.size());
  std::vector<long long> scaled(n);
  long long max_sum = 0;
  for (int i = 0; i < n; ++i) {
    scaled[i] = static_cast<long long>(std::llround(ranks[i] * 2.0));
    max_sum += scaled[i];
  }
  std::vector<double> count(max_sum + 1, 0.0);
  count[0] = 1.0;
  for (int i = 0; i < n; ++i)
    for (long long s = max_sum; s >= scaled[i]; --s) count[s] += count[s - scaled[i]];
  const double total = std::ldexp(1.0, n);  // 2^n
  const long long w2 = static_cast<long long>(std::llround(w_plus * 2.0));
  double le = 0.0, ge = 0.0;
  for (long long s = 0; s <= max_sum; ++s) {
    if (s <= w2) le += count[s];
    if (s >= w2) ge += count[s];
  }
  return std::min(1.0, 2.0 * std::min(le, ge) / total);
}

}  // namespace metricdet

// Signed-rank statistic on (values - mu); zero differences dropped, tied
// |differences| get average ranks. Exact two-sided p for n <= 25, normal
// approximation with tie correction and continuity correction above.
inline WilcoxonResult wilcoxon_one_sample(const std::vector<double>& values, double mu) {
  if (values.empty()) throw DomainError("wilcoxon: empty sample");
  std::vector<double> diffs;
  for (double v : values)
    if (v != mu) diffs.push_back(v - mu);
  WilcoxonResult r;
  r.n_effective = static_cast<int>(diffs.size());
  if (diffs.empty()) {
    r.degenerate = true;
    r.p = 1.0;
    return r;
  }
  std::vector<double> abs_diffs(diffs.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) abs_diffs[i] = std::fabs(diffs[i]);
  const auto ranks = average_ranks(abs_diffs);
  for (std::size_t i = 0; i < diffs.size(); ++i)
    if (diffs[i] > 0) r.w_plus += ranks[i];

  const int n = r.n_effective;
  if (n <= 25) {
    r.p = metricdet::exact_two_sided_p(ranks, r.w_plus);
    return r;
  }
  const double mean = n * (n + 1) / 4.0;
  double var = n * (n + 1) * (2.0 * n + 1.0) / 24.0;
  // tie correction: sum(t^3 - t)/48 per tied group
  std::vector<double> sorted = abs_diffs;
  std::sort(sorted.begin(), sorted.end());
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    var -= (t * t * t - t) / 48.0;
    i = j + 1;
  }
  if (var <= 0.0) {
    r.degenerate = true;
    r.p = 1.0;
    return r;
  }
  double z = r.w_plus - mean;
  z += z > 0 ? -0.5 : (z < 0 ? 0.5 : 0.0);  // continuity correction
  z /= std::sqrt(var);
  r.p = std::min(1.0, 2.0 * (1.0 - metricdet::normal_cdf(std::fabs(z))));
  return r;
}

// Benjamini-Hochberg step-up adjustment with monotonicity enforcement.
inline std::vector<double> fdr_adjust(const std::vector<double>& pvals) {
  for (double p : pvals)
    if (p < 0.0 || p > 1.0 || !std::isfinite(p)) throw DomainError("fdr_adjust: p-value outside [0,1]");
  const int m = static_cast<int>(pvals.size());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return pvals[a] < pvals[b]; });
  std::vector<double> adjusted(m, 0.0);
  double running_min = 1.0;
  for (int i = m - 1; i >= 0; --i) {
    const double candidate = std::min(1.0, pvals[order[i]] * m / (i + 1));
    running_min = std::min(running_min, candidate);
    adjusted[order[i]] = running_min;
  }
  return adjusted;
}

// ---------------------------------------------------------------------------
// Agreement statistics

// Quadratic weighted Cohen's kappa on labels 1..k. Undefined (nullopt) when
// either rater is constant.
inline std::optional<double> weighted_kappa(const std::vector<int>& a, const std::vector<int>& b, int k) {
  if (a.size() != b.size() || a.size() < 2) throw DomainError("weighted_kappa: misaligned or short lists");
  const double n = static_cast<double>(a.size());
  std::vector<std::vector<double>> observed(k, std::vector<double>(k, 0.0));
  std::vector<double> marg_a(k, 0.0), marg_b(k, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 1 || a[i] > k || b[i] < 1 || b[i] > k) throw DomainError("weighted_kappa: label out of range");
    observed[a[i] - 1][b[i] - 1] += 1.0 / n;
    marg_a[a[i] - 1] += 1.0 / n;
    marg_b[b[i] - 1] += 1.0 / n;
  }
  int distinct_a = 0, distinct_b = 0;
  for (int c = 0; c < k; ++c) {
    if (marg_a[c] > 0) ++distinct_a;
    if (marg_b[c] > 0) ++distinct_b;
  }
  if (distinct_a < 2 || distinct_b < 2) return std::nullopt;
  const double denom_w = static_cast<double>((k - 1) * (k - 1));
  double wo = 0.0, we = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double w = (i - j) * (i - j) / denom_w;
      wo += w * observed[i][j];
      we += w * marg_a[i] * marg_b[j];
    }
  if (we == 0.0) return std::nullopt;
  return 1.0 - wo / we;
}

// One-way random, single-measure ICC for two ratings per item:
// (MSB - MSW) / (MSB + MSW). Undefined when there is no variance at all.
inline std::optional<double> icc(const std::vector<std::pair<double, double>>& pairs) {
  const int n = static_cast<int>(pairs.size());
  if (n < 2) throw DomainError("icc: need at least 2 items");
  double grand = 0.0;
  for (const auto& [r1, r2] : pairs) grand += r1 + r2;
  grand /= 2.0 * n;
  double ssb = 0.0, ssw = 0.0;
  for (const auto& [r1, r2] : pairs) {
    const double item_mean = 0.5 * (r1 + r2);
    ssb += 2.0 * (item_mean - grand) * (item_mean - grand);
    ssw += (r1 - item_mean) * (r1 - item_mean) + (r2 - item_mean) * (r2 - item_mean);
  }
  const double msb = ssb / (n - 1);
  const double msw = ssw / n;
  if (msb + msw == 0.0) return std::nullopt;
  return (msb - msw) / (msb + msw);
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

inline double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace cohere
