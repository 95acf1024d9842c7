#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "cohere/corpus.hpp"
#include "cohere/textproc.hpp"

namespace cohere {

// Flesch-Kincaid grade level: 0.39 * words/sentences + 11.8 * syllables/words - 15.59.
inline double grade_level(const Document& doc) {
  const int sentences = doc.n_sentences();
  int words = 0;
  long long syllables = 0;
  for (const auto& s : doc.sentences)
    for (const auto& t : s.tokens) {
      if (!std::any_of(t.surface.begin(), t.surface.end(),
                       [](unsigned char c) { return std::isalnum(c); }))
        continue;
      ++words;
      syllables += count_syllables(t.surface);
    }
  if (sentences < 1 || words < 1) throw DomainError("grade_level: document has no words");
  return 0.39 * (static_cast<double>(words) / sentences) +
         11.8 * (static_cast<double>(syllables) / words) - 15.59;
}

// ---------------------------------------------------------------------------
// Score -> 3-class thresholds fit by training accuracy

enum class ThresholdOrientation { Increasing, Decreasing };

struct ThresholdFit {
  double t1 = 0.0;
  double t2 = 0.0;
  ThresholdOrientation orientation = ThresholdOrientation::Increasing;
  double train_accuracy = 0.0;
};

inline Coherence apply_thresholds(double score, const ThresholdFit& fit) {
  if (fit.orientation == ThresholdOrientation::Increasing) {
    if (score <= fit.t1) return Coherence::Low;
    if (score <= fit.t2) return Coherence::Medium;
    return Coherence::High;
  }
  if (score <= fit.t1) return Coherence::High;
  if (score <= fit.t2) return Coherence::Medium;
  return Coherence::Low;
}

namespace threshdet {

inline std::vector<double> candidate_cuts(const std::vector<double>& scores) {
  std::set<double> uniq(scores.begin(), scores.end());
  std::vector<double> sorted(uniq.begin(), uniq.end());
  std::vector<double> cuts;
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) cuts.push_back(0.5 * (sorted[i] + sorted[i + 1]));
  if (!sorted.empty()) {
    // 0.5-step grid across the observed range, matching thresholds like 6.5/7.0
    const double lo = std::floor(sorted.front() * 2.0) / 2.0 - 0.5;
    const double hi = std::ceil(sorted.back() * 2.0) / 2.0 + 0.5;
    for (double c = lo; c <= hi + 1e-12; c += 0.5) cuts.push_back(c);
    cuts.push_back(sorted.front() - 1.0);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

}  // namespace threshdet

// Grid search over cut pairs and both orientations, maximizing training
// accuracy; ties broken toward the lexicographically smaller (t1, t2), with
// the increasing orientation preferred on exact ties.
inline ThresholdFit fit_thresholds(const std::vector<double>& scores, const std::vector<Coherence>& labels) {
  if (scores.empty() || scores.size() != labels.size())
    throw DomainError("fit_thresholds: empty or misaligned input");
  const auto cuts = threshdet::candidate_cuts(scores);
  const int n = static_cast<int>(scores.size());
  const int m = static_cast<int>(cuts.size());

  // prefix[c][i] = count of label c among scores <= cuts[i]
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] < scores[b]; });
  std::vector<std::array<int, 3>> prefix(m, {0, 0, 0});
  {
    int at = 0;
    std::array<int, 3> running = {0, 0, 0};
    for (int ci = 0; ci < m; ++ci) {
      while (at < n && scores[order[at]] <= cuts[ci]) {
        ++running[static_cast<int>(labels[order[at]]) - 1];
        ++at;
      }
      prefix[ci] = running;
    }
  }
  std::array<int, 3> total = {0, 0, 0};
  for (const auto& l : labels) ++total[static_cast<int>(l) - 1];

  ThresholdFit best;
  int best_correct = -1;
  for (int orient = 0; orient < 2; ++orient) {
    // increasing: low <= t1 < medium <= t2 < high
    // decreasing: high <= t1 < medium <= t2 < low
    const int lo_class = orient == 0 ? 0 : 2;
    const int hi_class = orient == 0 ? 2 : 0;
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        const int correct = prefix[i][lo_class] + (prefix[j][1] - prefix[i][1]) +
                            (total[hi_class] - prefix[j][hi_class]);
        const bool better =
            correct > best_correct ||
            (correct == best_correct &&
             (cuts[i] < best.t1 || (cuts[i] == best.t1 && cuts[j] < best.t2) ||
              (cuts[i] == best.t1 && cuts[j] == best.t2 && orient == 0 &&
               best.orientation == ThresholdOrientation::Decreasing)));
        if (better) {
          best_correct = correct;
          best.t1 = cuts[i];
          best.t2 = cuts[j];
          best.orientation = orient == 0 ? ThresholdOrientation::Increasing : ThresholdOrientation::Decreasing;
        }
      }
    }
  }
  best.train_accuracy = static_cast<double>(best_correct) / n;
  return best;
}

// Binary variant used by the minority task: one cut, classes {positive class
// below/above}. Fit maximizes F_beta of the positive (low-coherence) side,
// since accuracy degenerates on 15-30% minority data.
struct BinaryThresholdFit {
  double cut = 0.0;
  bool positive_below = true;  // predict positive when score <= cut
  double train_f = 0.0;
};

inline BinaryThresholdFit fit_threshold_binary(const std::vector<double>& scores,
                                               const std::vector<bool>& positive, double beta) {
  if (scores.empty() || scores.size() != positive.size())
    throw DomainError("fit_threshold_binary: empty or misaligned input");
  const auto cuts = threshdet::candidate_cuts(scores);
  BinaryThresholdFit best;
  double best_f = -1.0;
  const double b2 = beta * beta;
  for (int dir = 0; dir < 2; ++dir) {
    for (double cut : cuts) {
      int tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = dir == 0 ? scores[i] <= cut : scores[i] > cut;
        if (pred && positive[i]) ++tp;
        else if (pred && !positive[i]) ++fp;
        else if (!pred && positive[i]) ++fn;
      }
      const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
      const double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
      const double denom = b2 * p + r;
      const double f = denom > 0 ? (1 + b2) * p * r / denom : 0.0;
      if (f > best_f) {
        best_f = f;
        best.cut = cut;
        best.positive_below = dir == 0;
        best.train_f = f;
      }
    }
  }
  return best;
}

}  // namespace cohere
