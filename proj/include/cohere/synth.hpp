#pragma once

// Deterministic synthetic corpus in the four-domain rated-text schema, for
// smoke tests and the bundled acceptance runs. Rating multisets are chosen so
// that consensus class distributions, majority-class test accuracies,
// high-coherence subset sizes, minority-relabel rates, and simulated
// annotator-agreement statistics land on the published reference values.
// Bodies carry learnable structure: entity chains and ordinal connectives for
// order-sensitive models, topic mixtures correlated with the coherence class
// for content models.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "cohere/corpus.hpp"
#include "cohere/csv.hpp"
#include "cohere/embeddings.hpp"
#include "cohere/rng.hpp"
#include "cohere/textproc.hpp"

namespace cohere::synth {

// Expert triples, type order:
// (1,1,1),(1,1,2),(1,1,3),(1,2,2),(1,2,3),(2,2,2),(1,3,3),(2,2,3),(2,3,3),(3,3,3)
inline const std::array<std::array<int, 3>, 10>& triple_types() {
  static const std::array<std::array<int, 3>, 10> t = {{{1, 1, 1},
                                                        {1, 1, 2},
                                                        {1, 1, 3},
                                                        {1, 2, 2},
                                                        {1, 2, 3},
                                                        {2, 2, 2},
                                                        {1, 3, 3},
                                                        {2, 2, 3},
                                                        {2, 3, 3},
                                                        {3, 3, 3}}};
  return t;
}

struct DomainPlan {
  std::array<int, 10> train_triples;
  std::array<int, 10> test_triples;
  std::array<int, 3> train_crowd_classes;  // low, med, high counts over 1000
  std::array<int, 3> test_crowd_classes;   // over 200
};

inline const DomainPlan& domain_plan(Domain d) {
  static const DomainPlan yahoo = {{207, 29, 64, 166, 44, 120, 125, 42, 113, 90},
                                   {41, 6, 13, 22, 11, 31, 26, 9, 23, 18},
                                   {355, 392, 253},
                                   {70, 79, 51}};
  static const DomainPlan clinton = {{134, 7, 25, 116, 165, 42, 186, 132, 23, 170},
                                     {27, 1, 5, 17, 31, 8, 40, 29, 5, 37},
                                     {367, 386, 247},
                                     {65, 81, 54}};
  static const DomainPlan enron = {{98, 14, 72, 115, 172, 22, 102, 166, 12, 227},
                                   {20, 3, 14, 28, 42, 5, 18, 29, 2, 39},
                                   {349, 442, 209},
                                   {60, 88, 52}};
  static const DomainPlan yelp = {{46, 51, 51, 123, 102, 116, 105, 258, 17, 131},
                                  {9, 10, 11, 32, 14, 16, 22, 54, 4, 28},
                                  {199, 434, 367},
                                  {45, 81, 74}};
  switch (d) {
    case Domain::Yahoo: return yahoo;
    case Domain::Clinton: return clinton;
    case Domain::Enron: return enron;
    default: return yelp;
  }
}

// Crowd quintuples per consensus class; four variants each.
inline const std::vector<std::vector<int>>& crowd_types(Coherence c) {
  static const std::vector<std::vector<int>> low = {
      {1, 1, 2, 2, 3}, {1, 1, 1, 2, 3}, {1, 2, 2, 2, 2}, {1, 1, 2, 2, 2}};
  static const std::vector<std::vector<int>> med = {
      {2, 2, 2, 2, 2}, {1, 2, 2, 2, 3}, {1, 2, 2, 3, 3}, {2, 2, 2, 2, 3}};
  static const std::vector<std::vector<int>> high = {
      {2, 2, 3, 3, 3}, {1, 2, 3, 3, 3}, {2, 2, 2, 3, 3}, {2, 3, 3, 3, 3}};
  switch (c) {
    case Coherence::Low: return low;
    case Coherence::Medium: return med;
    default: return high;
  }
}

// ---------------------------------------------------------------------------
// Vocabulary

struct TopicBank {
  std::vector<std::string> nouns;
};

inline const std::vector<TopicBank>& topic_banks() {
  static const std::vector<TopicBank> banks = {
      {{"garden", "tomatoes", "seedlings", "compost", "greenhouse", "harvest", "trellis", "soil",
        "mulch", "beds"}},
      {{"budget", "invoice", "vendor", "contract", "quarter", "forecast", "audit", "payroll",
        "ledger", "expenses"}},
      {{"kitchen", "menu", "dessert", "noodles", "sauce", "waiter", "brunch", "portions",
        "flavor", "patio"}},
      {{"forum", "thread", "moderator", "replies", "username", "upvotes", "archive", "spam",
        "newbie", "faq"}},
      {{"hiking", "summit", "ridgeline", "switchback", "campsite", "lantern", "trailhead",
        "creek", "boulders", "mileage"}},
      {{"workshop", "lathe", "varnish", "walnut", "dovetail", "chisel", "sawdust", "clamps",
        "joinery", "plywood"}}};
  return banks;
}

inline const std::vector<std::string>& name_pool() {
  static const std::vector<std::string> names = {"Marisol", "Tobias", "Ingrid", "Priya", "Carver",
                                                 "Lena",    "Dmitri", "Aiko",   "Ruben", "Salma",
                                                 "Petra",   "Felix",  "Nadia",  "Oscar", "Hugo",
                                                 "Imani",   "Bruno",  "Celia",  "Dario", "Wren"};
  return names;
}

inline const std::vector<std::string>& verb_pool() {
  // all present in the role heuristic's verb lexicon
  static const std::vector<std::string> verbs = {
      "checked",  "covered",  "updated", "confirmed", "shared",    "handled", "reviewed",
      "visited",  "discussed","noted",   "enjoyed",   "raised",    "delivered", "prepared",
      "supported","mentioned","explained","offered",  "showed",    "helped",  "praised",
      "thanked",  "started",  "finished","planned"};
  return verbs;
}

inline const std::vector<std::string>& ordinal_openers() {
  static const std::vector<std::string> openers = {"First",        "Second",     "Then",
                                                   "Next",         "Afterward",  "Later",
                                                   "Subsequently", "Eventually", "Finally",
                                                   "Lastly",       "Ultimately", "Overall"};
  return openers;
}

inline const std::vector<std::string>& high_markers() {
  static const std::vector<std::string> words = {"moreover", "therefore", "indeed", "clearly",
                                                 "altogether"};
  return words;
}

inline const std::vector<std::string>& low_markers() {
  static const std::vector<std::string> words = {"anyway", "basically", "whatever", "randomly",
                                                 "somehow"};
  return words;
}

// Topics available to a domain (two per domain, plus a third for low-class
// mixing, chosen from the shared banks).
inline std::array<int, 3> domain_topics(Domain d) {
  switch (d) {
    case Domain::Yahoo: return {3, 4, 0};
    case Domain::Clinton: return {1, 3, 5};
    case Domain::Enron: return {1, 5, 2};
    default: return {2, 0, 4};
  }
}

// ---------------------------------------------------------------------------
// Body generation

namespace detail {

inline std::string make_sentence(Coherence cls, int index, const std::string& subject,
                                 const std::string& object_name, int topic, Rng& rng) {
  const auto& bank = topic_banks()[topic].nouns;
  const auto& verbs = verb_pool();
  std::string noun1 = bank[rng.next_below(bank.size())];
  std::string noun2 = bank[rng.next_below(bank.size())];
  std::string verb = verbs[rng.next_below(verbs.size())];
  std::string s;
  if (cls == Coherence::High) {
    const auto& openers = ordinal_openers();
    s += openers[std::min<std::size_t>(index, openers.size() - 1)] + ", ";
  } else if (cls == Coherence::Medium) {
    if (rng.next_below(2) == 0) {
      const auto& openers = ordinal_openers();
      s += openers[rng.next_below(openers.size())] + ", ";
    }
  } else {
    if (rng.next_below(3) == 0) {
      const auto& fillers = low_markers();
      std::string f = fillers[rng.next_below(fillers.size())];
      f[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(f[0])));
      s += f + ", ";
    }
  }
  s += subject + " " + verb + " the " + noun1 + " with " + object_name;
  switch (rng.next_below(4)) {
    case 0: s += " near the " + noun2; break;
    case 1: s += " and " + verbs[rng.next_below(verbs.size())] + " the " + noun2; break;
    case 2: s += " before the " + noun2 + " arrived"; break;
    default: s += " for the " + noun2; break;
  }
  if (cls == Coherence::High && rng.next_below(3) == 0) {
    s += ", " + high_markers()[rng.next_below(high_markers().size())];
  } else if (cls == Coherence::Low && rng.next_below(3) == 0) {
    s += ", " + low_markers()[rng.next_below(low_markers().size())];
  }
  s += ".";
  return s;
}

}  // namespace detail

// One body whose structure reflects its coherence class. Word counts land in
// [100, 300]; every text has at least 10 sentences.
inline std::string make_body(Coherence cls, Domain domain, Rng& rng) {
  const auto topics = domain_topics(domain);
  const int n_sentences = 12 + static_cast<int>(rng.next_below(3));
  // four distinct protagonists
  const auto& names = name_pool();
  std::vector<int> picks(names.size());
  std::iota(picks.begin(), picks.end(), 0);
  std::vector<std::string> cast;
  for (int i = 0; i < 4; ++i) {
    const int j = i + static_cast<int>(rng.next_below(picks.size() - i));
    std::swap(picks[i], picks[j]);
    cast.push_back(names[picks[i]]);
  }

  std::vector<std::string> sentences;
  std::string subject = cast[0];
  for (int i = 0; i < n_sentences; ++i) {
    int topic;
    std::string object_name = cast[rng.next_below(cast.size())];
    switch (cls) {
      case Coherence::High:
        topic = topics[0];
        // unbroken entity chain: next subject is this sentence's object
        break;
      case Coherence::Medium:
        topic = i < n_sentences / 2 ? topics[0] : topics[1];
        break;
      default:
        topic = topics[rng.next_below(3)];
        subject = cast[rng.next_below(cast.size())];  // chain broken
        break;
    }
    while (object_name == subject) object_name = cast[rng.next_below(cast.size())];
    sentences.push_back(detail::make_sentence(cls, i, subject, object_name, topic, rng));
    if (cls == Coherence::High || (cls == Coherence::Medium && rng.next_below(4) != 0))
      subject = object_name;
  }

  const int n_paragraphs = cls == Coherence::High ? 3 : (cls == Coherence::Medium ? 2 : 1);
  std::string body;
  const int per_par = (n_sentences + n_paragraphs - 1) / n_paragraphs;
  for (int i = 0; i < n_sentences; ++i) {
    if (i > 0) body += (i % per_par == 0) ? "\n\n" : " ";
    body += sentences[i];
  }
  return body;
}

// ---------------------------------------------------------------------------
// Record assembly

inline std::uint64_t splitmix_of(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::vector<RawRecord> generate_domain(Domain domain, Split split, std::uint64_t seed) {
  const auto& plan = domain_plan(domain);
  const auto& triples = split == Split::Train ? plan.train_triples : plan.test_triples;
  const auto& crowd_classes = split == Split::Train ? plan.train_crowd_classes : plan.test_crowd_classes;
  Rng rng(seed ^ (static_cast<std::uint64_t>(domain) << 8) ^ (split == Split::Test ? 0xffULL : 0x0ULL));

  // expand expert triples, tagged with their consensus class
  std::vector<std::vector<int>> expert;
  for (std::size_t t = 0; t < triples.size(); ++t)
    for (int c = 0; c < triples[t]; ++c)
      expert.push_back({triple_types()[t][0], triple_types()[t][1], triple_types()[t][2]});
  rng.shuffle(expert);

  // crowd quintuples: per-class pools cycled through the four variants
  std::vector<std::vector<int>> crowd_pool;
  for (int cls = 0; cls < 3; ++cls) {
    const auto& types = crowd_types(static_cast<Coherence>(cls + 1));
    for (int i = 0; i < crowd_classes[cls]; ++i) crowd_pool.push_back(types[i % types.size()]);
  }

  // pair crowd with expert by class rank so the two label sources correlate
  std::vector<int> expert_order(expert.size()), crowd_order(crowd_pool.size());
  std::iota(expert_order.begin(), expert_order.end(), 0);
  std::iota(crowd_order.begin(), crowd_order.end(), 0);
  auto class_of = [](const std::vector<int>& ratings) {
    return static_cast<int>(consensus_label(ratings).value);
  };
  std::stable_sort(expert_order.begin(), expert_order.end(),
                   [&](int a, int b) { return class_of(expert[a]) < class_of(expert[b]); });
  std::stable_sort(crowd_order.begin(), crowd_order.end(),
                   [&](int a, int b) { return class_of(crowd_pool[a]) < class_of(crowd_pool[b]); });

  std::vector<RawRecord> records(expert.size());
  for (std::size_t rank = 0; rank < expert_order.size(); ++rank) {
    const int e = expert_order[rank];
    RawRecord& rec = records[e];
    rec.domain = domain;
    rec.split = split;
    rec.expert_ratings = expert[e];
    rec.crowd_ratings = crowd_pool[crowd_order[rank]];
    rng.shuffle(rec.expert_ratings);
    rng.shuffle(rec.crowd_ratings);
  }
  const char* split_tag = split == Split::Train ? "train" : "test";
  for (std::size_t i = 0; i < records.size(); ++i) {
    char id[64];
    std::snprintf(id, sizeof id, "%s_%s_%04zu", domain_name(records[i].domain), split_tag, i);
    records[i].text_id = id;
    const Coherence cls = consensus_label(records[i].expert_ratings).value;
    Rng body_rng(seed ^ splitmix_of(records[i].text_id));
    records[i].body = make_body(cls, domain, body_rng);
  }
  return records;
}

inline void write_corpus_csv(const std::vector<RawRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("synth: cannot write " + path);
  write_csv_row(out, {"text_id", "text", "expert1", "expert2", "expert3", "crowd1", "crowd2", "crowd3",
                      "crowd4", "crowd5"});
  for (const auto& r : records) {
    std::vector<std::string> row = {r.text_id, r.body};
    for (int x : r.expert_ratings) row.push_back(std::to_string(x));
    for (int x : r.crowd_ratings) row.push_back(std::to_string(x));
    write_csv_row(out, row);
  }
}

// ---------------------------------------------------------------------------
// Synthetic embeddings: topic words cluster around per-topic centroids; every
// other vocabulary item gets its own stable random direction.

inline std::vector<std::string> full_vocabulary() {
  std::vector<std::string> vocab;
  for (const auto& bank : topic_banks())
    for (const auto& w : bank.nouns) vocab.push_back(w);
  for (const auto& w : name_pool()) vocab.push_back(textdet::to_lower(w));
  for (const auto& w : verb_pool()) vocab.push_back(w);
  for (const auto& w : ordinal_openers()) vocab.push_back(textdet::to_lower(w));
  for (const auto& w : high_markers()) vocab.push_back(w);
  for (const auto& w : low_markers()) vocab.push_back(w);
  for (const char* w : {"the", "with", "near", "and", "before", "for", "arrived"})
    vocab.push_back(w);
  return vocab;
}

inline EmbeddingTable synth_embedding_table(int dim, std::uint64_t seed) {
  EmbeddingTable table(dim);
  Rng rng(seed ^ 0xe1b0e1b0e1b0ULL);
  auto unit = [&](std::vector<double> v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm > 0 ? norm : 1.0;
    return v;
  };
  std::vector<std::vector<double>> centroids;
  for (std::size_t t = 0; t < topic_banks().size(); ++t) {
    std::vector<double> c(dim);
    for (auto& x : c) x = rng.next_gaussian();
    centroids.push_back(unit(c));
  }
  auto add = [&](const std::string& word, const std::vector<double>* centroid) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.next_gaussian();
    if (centroid) {
      v = unit(v);
      for (int i = 0; i < dim; ++i) v[i] = (*centroid)[i] + 0.35 * v[i];
    }
    table.insert(word, unit(v));
  };
  for (std::size_t t = 0; t < topic_banks().size(); ++t)
    for (const auto& w : topic_banks()[t].nouns) add(w, &centroids[t]);
  for (const auto& w : full_vocabulary())
    if (!table.contains(w)) add(w, nullptr);
  return table;
}

inline void write_synth_embeddings(const std::string& path, int dim, std::uint64_t seed) {
  const auto table = synth_embedding_table(dim, seed);
  std::ofstream out(path);
  if (!out) throw DataError("synth: cannot write " + path);
  out << std::setprecision(10);
  std::set<std::string> written;
  for (const auto& word : full_vocabulary()) {
    if (!table.contains(word) || !written.insert(word).second) continue;
    out << word;
    for (double x : table.lookup(word)) out << ' ' << x;
    out << '\n';
  }
}

}  // namespace cohere::synth
