#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cohere/errors.hpp"

namespace cohere {

// Frozen pre-trained word vectors. Lookup of an unseen word yields the zero
// vector; texts are lowercased before lookup.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(int dim) : dim_(dim), oov_(dim, 0.0) {}

  int dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

  void insert(const std::string& word, std::vector<double> v) {
    if (static_cast<int>(v.size()) != dim_) throw DomainError("embedding dim mismatch for '" + word + "'");
    vectors_[word] = std::move(v);
  }

  bool contains(const std::string& word) const { return vectors_.count(word) > 0; }

  const std::vector<double>& lookup(const std::string& word) const {
    auto it = vectors_.find(word);
    return it == vectors_.end() ? oov_ : it->second;
  }

 private:
  int dim_ = 0;
  std::vector<double> oov_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// File format: one entry per line, "word v1 v2 ... v_dim", space-separated.
inline EmbeddingTable load_embeddings(std::istream& in, int dim) {
  EmbeddingTable table(dim);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> v;
    v.reserve(dim);
    double x;
    while (ss >> x) v.push_back(x);
    if (static_cast<int>(v.size()) != dim)
      throw ParseError("embeddings line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                       " components, found " + std::to_string(v.size()));
    table.insert(word, std::move(v));
  }
  return table;
}

inline EmbeddingTable load_embeddings_file(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw DataError("embeddings: cannot open " + path);
  try {
    return load_embeddings(in, dim);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace cohere
