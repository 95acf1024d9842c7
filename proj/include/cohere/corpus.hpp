#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cohere/csv.hpp"
#include "cohere/errors.hpp"
#include "cohere/rng.hpp"

namespace cohere {

enum class Domain { Yahoo, Clinton, Enron, Yelp, Other };
enum class Split { Train, Test };
enum class Coherence : int { Low = 1, Medium = 2, High = 3 };
enum class RaterSource { Expert, Crowd };
enum class MinorityLabel { Low, NotLow };

inline const char* domain_name(Domain d) {
  switch (d) {
    case Domain::Yahoo: return "Yahoo";
    case Domain::Clinton: return "Clinton";
    case Domain::Enron: return "Enron";
    case Domain::Yelp: return "Yelp";
    default: return "Other";
  }
}

inline std::optional<Domain> domain_from_name(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "yahoo") return Domain::Yahoo;
  if (s == "clinton") return Domain::Clinton;
  if (s == "enron") return Domain::Enron;
  if (s == "yelp") return Domain::Yelp;
  if (s == "other") return Domain::Other;
  return std::nullopt;
}

inline const char* coherence_name(Coherence c) {
  switch (c) {
    case Coherence::Low: return "low";
    case Coherence::Medium: return "medium";
    default: return "high";
  }
}

struct RawRecord {
  std::string text_id;
  Domain domain = Domain::Other;
  std::string body;  // paragraph breaks preserved verbatim
  std::vector<int> expert_ratings;
  std::vector<int> crowd_ratings;
  Split split = Split::Train;
};

struct ConsensusLabel {
  Coherence value = Coherence::Medium;
  double mean_score = 0.0;
  RaterSource source = RaterSource::Expert;
};

struct Permutation {
  std::string text_id;
  std::vector<int> order;  // bijection on 0..n-1, never identity
  std::uint64_t seed = 0;
};

// Mean-score thresholding: low <= 1.8 < medium <= 2.2 < high.
// Compared in integer arithmetic (5*sum vs 9*n, 11*n) so boundary means such
// as 9/5 = 1.8 classify exactly.
inline ConsensusLabel consensus_label(const std::vector<int>& ratings,
                                      RaterSource source = RaterSource::Expert) {
  if (ratings.empty()) throw DomainError("consensus_label: empty rating list");
  long long sum = 0;
  for (int r : ratings) {
    if (r < 1 || r > 3) throw DomainError("consensus_label: rating outside {1,2,3}");
    sum += r;
  }
  const long long n = static_cast<long long>(ratings.size());
  ConsensusLabel out;
  out.source = source;
  out.mean_score = static_cast<double>(sum) / static_cast<double>(n);
  if (5 * sum <= 9 * n)
    out.value = Coherence::Low;
  else if (5 * sum <= 11 * n)
    out.value = Coherence::Medium;
  else
    out.value = Coherence::High;
  return out;
}

// Low iff at least two of the three expert ratings are 1.
inline MinorityLabel minority_relabel(const std::vector<int>& expert_ratings) {
  if (expert_ratings.size() != 3) throw DomainError("minority_relabel: expected exactly 3 expert ratings");
  int ones = 0;
  for (int r : expert_ratings) {
    if (r < 1 || r > 3) throw DomainError("minority_relabel: rating outside {1,2,3}");
    if (r == 1) ++ones;
  }
  return ones >= 2 ? MinorityLabel::Low : MinorityLabel::NotLow;
}

struct SelectionFilterConfig {
  int min_words = 100;
  int max_words = 300;
  int max_line_breaks = 15;
};

inline int whitespace_word_count(const std::string& body) {
  int count = 0;
  bool in_word = false;
  for (char c : body) {
    const bool space = (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v');
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

inline bool contains_url(const std::string& body) {
  return body.find("http://") != std::string::npos || body.find("https://") != std::string::npos ||
         body.find("www.") != std::string::npos;
}

// Text-selection filter: word count in [100,300], no URL substring, and a
// configurable cap on line breaks (list-like texts). Total function.
inline bool selection_filter(const std::string& body, const SelectionFilterConfig& cfg = {}) {
  const int words = whitespace_word_count(body);
  if (words < cfg.min_words || words > cfg.max_words) return false;
  if (contains_url(body)) return false;
  const long breaks = std::count(body.begin(), body.end(), '\n');
  return breaks <= cfg.max_line_breaks;
}

// ---------------------------------------------------------------------------
// Corpus loading

// Rating columns may be empty for ratings-free corpora (the newswire-style
// ordering protocol treats every original text as coherent); such records
// load with unanimous top ratings.
struct ColumnMap {
  std::string text_id = "text_id";
  std::string body = "text";
  std::vector<std::string> expert = {"expert1", "expert2", "expert3"};
  std::vector<std::string> crowd = {"crowd1", "crowd2", "crowd3", "crowd4", "crowd5"};
};

namespace detail {
inline int require_column(const CsvTable& t, const std::string& name) {
  const int idx = t.column(name);
  if (idx < 0) throw SchemaError("missing column '" + name + "'");
  return idx;
}

inline int parse_rating(const std::string& field, const std::string& row_id, const std::string& col) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(field, &pos);
  } catch (...) {
    throw ValidationError("row '" + row_id + "': rating column '" + col + "' is not an integer: '" + field + "'");
  }
  if (pos != field.size() || v < 1 || v > 3)
    throw ValidationError("row '" + row_id + "': rating '" + field + "' in column '" + col +
                          "' outside {1,2,3}");
  return v;
}
}  // namespace detail

inline std::vector<RawRecord> load_corpus(const std::string& path, const ColumnMap& map = {},
                                          Domain domain = Domain::Other, Split split = Split::Train) {
  const CsvTable table = read_csv_file(path);
  const int id_col = detail::require_column(table, map.text_id);
  const int body_col = detail::require_column(table, map.body);
  std::vector<int> expert_cols, crowd_cols;
  for (const auto& c : map.expert) expert_cols.push_back(detail::require_column(table, c));
  for (const auto& c : map.crowd) crowd_cols.push_back(detail::require_column(table, c));

  std::vector<RawRecord> records;
  records.reserve(table.rows.size());
  std::set<std::string> seen_ids;
  for (const auto& row : table.rows) {
    if (row.size() < table.header.size())
      throw ValidationError(path + ": row with " + std::to_string(row.size()) + " fields, expected " +
                            std::to_string(table.header.size()));
    RawRecord rec;
    rec.text_id = row[id_col];
    rec.domain = domain;
    rec.split = split;
    rec.body = row[body_col];
    if (!seen_ids.insert(rec.text_id).second)
      throw ValidationError("duplicate text_id '" + rec.text_id + "'");
    for (std::size_t i = 0; i < expert_cols.size(); ++i)
      rec.expert_ratings.push_back(detail::parse_rating(row[expert_cols[i]], rec.text_id, map.expert[i]));
    for (std::size_t i = 0; i < crowd_cols.size(); ++i)
      rec.crowd_ratings.push_back(detail::parse_rating(row[crowd_cols[i]], rec.text_id, map.crowd[i]));
    if (map.expert.empty()) rec.expert_ratings.assign(3, 3);
    if (map.crowd.empty()) rec.crowd_ratings.assign(5, 3);
    records.push_back(std::move(rec));
  }
  return records;
}

inline const std::vector<int>& ratings_for(const RawRecord& r, RaterSource s) {
  return s == RaterSource::Expert ? r.expert_ratings : r.crowd_ratings;
}

// Retains exactly the records whose expert consensus is high.
inline std::vector<RawRecord> ordering_subset(const std::vector<RawRecord>& records,
                                              RaterSource source = RaterSource::Expert) {
  std::vector<RawRecord> out;
  for (const auto& r : records)
    if (consensus_label(ratings_for(r, source), source).value == Coherence::High) out.push_back(r);
  return out;
}

struct ClassDistributionStats {
  std::array<int, 3> counts = {0, 0, 0};  // low, medium, high
  int total = 0;
  double pct(Coherence c) const {
    return total == 0 ? 0.0 : 100.0 * counts[static_cast<int>(c) - 1] / total;
  }
};

inline ClassDistributionStats class_distribution(const std::vector<RawRecord>& records, RaterSource source) {
  ClassDistributionStats stats;
  for (const auto& r : records) {
    const auto label = consensus_label(ratings_for(r, source), source);
    ++stats.counts[static_cast<int>(label.value) - 1];
    ++stats.total;
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Sentence-order permutations

namespace detail {
// All non-identity permutations of 0..n-1 in lexicographic order. n <= 7.
inline std::vector<std::vector<int>> enumerate_permutations(int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<int>> all;
  while (std::next_permutation(order.begin(), order.end())) all.push_back(order);
  return all;
}
}  // namespace detail

// Up to `count` distinct non-identity orderings of n sentences. Exhaustive
// enumeration for n <= 7 (then a seeded subsample if needed); rejection
// sampling with dedup above. Returns an empty list when n < 2 — the caller's
// skip signal, since no non-identity reordering exists.
inline std::vector<Permutation> generate_permutations(const std::string& text_id, int n_sentences, int count,
                                                      std::uint64_t seed) {
  std::vector<Permutation> out;
  if (n_sentences < 2 || count <= 0) return out;
  Rng rng(seed ^ std::hash<std::string>{}(text_id));
  std::vector<std::vector<int>> orders;
  if (n_sentences <= 7) {
    orders = detail::enumerate_permutations(n_sentences);
    if (static_cast<int>(orders.size()) > count) {
      rng.shuffle(orders);
      orders.resize(count);
    }
  } else {
    // clamp count to n!-1 while the factorial is still representable, so the
    // rejection loop cannot run dry
    if (n_sentences <= 20) {
      unsigned long long fact = 1;
      for (int i = 2; i <= n_sentences; ++i) fact *= static_cast<unsigned long long>(i);
      count = static_cast<int>(std::min<unsigned long long>(count, fact - 1));
    }
    std::set<std::vector<int>> seen;
    std::vector<int> identity(n_sentences);
    std::iota(identity.begin(), identity.end(), 0);
    while (static_cast<int>(orders.size()) < count) {
      std::vector<int> candidate = identity;
      rng.shuffle(candidate);
      if (candidate == identity) continue;
      if (seen.insert(candidate).second) orders.push_back(candidate);
    }
  }
  out.reserve(orders.size());
  for (auto& o : orders) out.push_back(Permutation{text_id, std::move(o), seed});
  return out;
}

}  // namespace cohere
