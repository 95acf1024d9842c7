#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cohere/textproc.hpp"

namespace cohere {

// Sentence x entity matrix over {S, O, X, -}. Column order is first-mention
// order, which keeps grids deterministic.
struct EntityGrid {
  int n_sentences = 0;
  bool syntax_on = true;
  std::vector<std::string> entity_keys;
  std::vector<std::vector<char>> columns;  // [entity][sentence]
  std::vector<int> entity_freq;            // total mention count per entity

  int n_entities() const { return static_cast<int>(columns.size()); }

  EntityGrid rows_permuted(const std::vector<int>& order) const {
    EntityGrid out = *this;
    for (std::size_t e = 0; e < columns.size(); ++e)
      for (std::size_t i = 0; i < order.size(); ++i) out.columns[e][i] = columns[e][order[i]];
    return out;
  }
};

inline EntityGrid build_grid(const Document& doc, const std::vector<EntityMentionSet>& entities,
                             bool syntax_on) {
  EntityGrid grid;
  grid.n_sentences = doc.n_sentences();
  grid.syntax_on = syntax_on;
  for (const auto& ent : entities) {
    std::vector<char> col(grid.n_sentences, '-');
    for (const auto& [sentence, role] : ent.best_role)
      col[sentence] = syntax_on ? role_char(role) : 'X';
    grid.entity_keys.push_back(ent.key);
    grid.columns.push_back(std::move(col));
    grid.entity_freq.push_back(ent.total_mentions());
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Transition probability features

namespace griddet {

inline int symbol_index(char c) {
  switch (c) {
    case 'S': return 0;
    case 'O': return 1;
    case 'X': return 2;
    default: return 3;  // '-'
  }
}

inline char symbol_at(int idx) { return "SOX-"[idx]; }

inline int pow4(int k) {
  int p = 1;
  for (int i = 0; i < k; ++i) p *= 4;
  return p;
}

}  // namespace griddet

// Probabilities of length-k vertical transitions, optionally split into two
// salience classes (salient iff entity_freq > threshold). Each class's
// features form a distribution over the 4^k transition strings; classes with
// no transitions stay all-zero. k > n_sentences marks the vector degenerate.
struct TransitionFeatures {
  int k = 2;
  std::optional<int> salience_threshold;
  bool degenerate = false;
  std::vector<double> values;  // [class][transition], salient class first

  int n_classes() const { return salience_threshold ? 2 : 1; }

  static std::string transition_name(int code, int k) {
    std::string s(k, '-');
    for (int i = k - 1; i >= 0; --i) {
      s[i] = griddet::symbol_at(code % 4);
      code /= 4;
    }
    return s;
  }

  double value(int cls, const std::string& transition) const {
    int code = 0;
    for (char c : transition) code = code * 4 + griddet::symbol_index(c);
    return values[cls * griddet::pow4(k) + code];
  }
};

inline TransitionFeatures transition_features(const EntityGrid& grid, int k,
                                              std::optional<int> salience_threshold = std::nullopt) {
  if (k < 2) throw DomainError("transition_features: k must be >= 2");
  TransitionFeatures out;
  out.k = k;
  out.salience_threshold = salience_threshold;
  const int n_classes = out.n_classes();
  const int width = griddet::pow4(k);
  out.values.assign(n_classes * width, 0.0);
  if (k > grid.n_sentences) {
    out.degenerate = true;
    return out;
  }
  std::vector<double> totals(n_classes, 0.0);
  for (int e = 0; e < grid.n_entities(); ++e) {
    int cls = 0;
    if (salience_threshold) cls = grid.entity_freq[e] > *salience_threshold ? 0 : 1;
    const auto& col = grid.columns[e];
    for (int i = 0; i + k <= grid.n_sentences; ++i) {
      int code = 0;
      for (int j = 0; j < k; ++j) code = code * 4 + griddet::symbol_index(col[i + j]);
      out.values[cls * width + code] += 1.0;
      totals[cls] += 1.0;
    }
  }
  for (int cls = 0; cls < n_classes; ++cls) {
    if (totals[cls] == 0.0) continue;
    for (int t = 0; t < width; ++t) out.values[cls * width + t] /= totals[cls];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Entity graph score

enum class GraphMode { Unweighted, SharedCount, Syntactic };

inline double role_weight(char c) {
  switch (c) {
    case 'S': return 3.0;
    case 'O': return 2.0;
    case 'X': return 1.0;
    default: return 0.0;
  }
}

// Average out-degree of the sentence projection graph: forward edge i->j iff
// the two sentences share an entity; weight by mode; optional distance
// discount divides by (j - i); score = total edge weight / n.
inline double egraph_score_from_grid(const EntityGrid& grid, GraphMode mode, bool distance_discount) {
  const int n = grid.n_sentences;
  if (n == 0) throw DomainError("egraph_score: empty document");
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double w = 0.0;
      bool any = false;
      for (int e = 0; e < grid.n_entities(); ++e) {
        const char ci = grid.columns[e][i];
        const char cj = grid.columns[e][j];
        if (ci == '-' || cj == '-') continue;
        any = true;
        switch (mode) {
          case GraphMode::Unweighted: w = 1.0; break;
          case GraphMode::SharedCount: w += 1.0; break;
          case GraphMode::Syntactic: w += role_weight(ci) * role_weight(cj); break;
        }
      }
      if (!any) continue;
      if (distance_discount) w /= static_cast<double>(j - i);
      total += w;
    }
  }
  return total / static_cast<double>(n);
}

inline double egraph_score(const Document& doc, const std::vector<EntityMentionSet>& entities,
                           GraphMode mode, bool distance_discount) {
  return egraph_score_from_grid(build_grid(doc, entities, /*syntax_on=*/true), mode, distance_discount);
}

}  // namespace cohere
