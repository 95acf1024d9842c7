#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "cohere/embeddings.hpp"
#include "cohere/textproc.hpp"

namespace cohere {

// Sentence graph with forward edges only (i -> j, i < j), positive weights.
struct SentenceGraph {
  int n = 0;
  std::vector<std::vector<bool>> adj;  // adj[i][j], i < j

  bool edge(int i, int j) const { return adj[i][j]; }
};

// Edge i->j iff some word pair (one word per sentence, both in-vocabulary)
// exceeds the cosine-similarity threshold. Comparison is strict (> threshold).
inline SentenceGraph build_similarity_graph(const Document& doc, const EmbeddingTable& embeddings,
                                            double sim_threshold) {
  SentenceGraph g;
  g.n = doc.n_sentences();
  g.adj.assign(g.n, std::vector<bool>(g.n, false));

  std::vector<std::vector<const std::vector<double>*>> vecs(g.n);
  for (int i = 0; i < g.n; ++i) {
    for (const auto& t : doc.sentences[i].tokens) {
      if (!embeddings.contains(t.lower)) continue;
      vecs[i].push_back(&embeddings.lookup(t.lower));
    }
  }
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      bool connected = false;
      for (const auto* a : vecs[i]) {
        for (const auto* b : vecs[j]) {
          if (cosine_similarity(*a, *b) > sim_threshold) {
            connected = true;
            break;
          }
        }
        if (connected) break;
      }
      g.adj[i][j] = connected;
    }
  }
  return g;
}

namespace graphdet {

// Adjacency bitstring of a k-node digraph under a node permutation: bit for
// ordered pair (u,v), u != v, row-major.
inline std::uint64_t adjacency_code(const std::vector<std::vector<bool>>& adj, const std::vector<int>& perm) {
  const int k = static_cast<int>(perm.size());
  std::uint64_t code = 0;
  for (int u = 0; u < k; ++u)
    for (int v = 0; v < k; ++v) {
      if (u == v) continue;
      code <<= 1;
      if (adj[perm[u]][perm[v]]) code |= 1;
    }
  return code;
}

// Canonical form: minimum adjacency code over all k! node permutations.
// Exact and cheap for the k <= 6 grid range.
inline std::uint64_t canonical_code(const std::vector<std::vector<bool>>& adj) {
  const int k = static_cast<int>(adj.size());
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::uint64_t best = ~0ULL;
  do {
    best = std::min(best, adjacency_code(adj, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace graphdet

// Frequencies of canonical k-node subgraph classes over the windows of k
// consecutive sentences, normalized by window count. A document with fewer
// than k sentences has no windows and is flagged degenerate.
struct SubgraphHistogram {
  int k = 3;
  double sim_threshold = 0.5;
  bool degenerate = false;
  std::map<std::uint64_t, double> class_freq;  // canonical code -> frequency
};

inline SubgraphHistogram subgraph_histogram(const SentenceGraph& g, int k, double sim_threshold) {
  if (k < 2) throw DomainError("subgraph_histogram: k must be >= 2");
  SubgraphHistogram hist;
  hist.k = k;
  hist.sim_threshold = sim_threshold;
  const int n_windows = g.n - k + 1;
  if (n_windows <= 0) {
    hist.degenerate = true;
    return hist;
  }
  for (int w = 0; w < n_windows; ++w) {
    std::vector<std::vector<bool>> sub(k, std::vector<bool>(k, false));
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) sub[a][b] = g.edge(w + a, w + b);
    hist.class_freq[graphdet::canonical_code(sub)] += 1.0;
  }
  for (auto& [code, v] : hist.class_freq) v /= static_cast<double>(n_windows);
  return hist;
}

inline SubgraphHistogram lexgraph_features(const Document& doc, const EmbeddingTable& embeddings,
                                           double sim_threshold, int k) {
  return subgraph_histogram(build_similarity_graph(doc, embeddings, sim_threshold), k, sim_threshold);
}

}  // namespace cohere
