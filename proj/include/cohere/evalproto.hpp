#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cohere/agreement.hpp"
#include "cohere/corpus.hpp"
#include "cohere/embeddings.hpp"
#include "cohere/forest.hpp"
#include "cohere/graph.hpp"
#include "cohere/grid.hpp"
#include "cohere/metrics.hpp"
#include "cohere/models.hpp"
#include "cohere/readability.hpp"
#include "cohere/train.hpp"

namespace cohere {

enum class Task { Classify3, ScorePredict, Ordering, Minority };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::Classify3: return "classify3";
    case Task::ScorePredict: return "score_predict";
    case Task::Ordering: return "ordering";
    default: return "minority";
  }
}

inline std::optional<Task> task_from_name(const std::string& s) {
  if (s == "classify3") return Task::Classify3;
  if (s == "score_predict") return Task::ScorePredict;
  if (s == "ordering") return Task::Ordering;
  if (s == "minority") return Task::Minority;
  return std::nullopt;
}

enum class ModelKind { Majority, Baseline, EGrid, EGraph, EGridConv, LexGraph, Clique, SentAvg, ParSeq, SentSeq };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Majority: return "majority";
    case ModelKind::Baseline: return "baseline";
    case ModelKind::EGrid: return "egrid";
    case ModelKind::EGraph: return "egraph";
    case ModelKind::EGridConv: return "egridconv";
    case ModelKind::LexGraph: return "lexgraph";
    case ModelKind::Clique: return "clique";
    case ModelKind::SentAvg: return "sentavg";
    case ModelKind::ParSeq: return "parseq";
    default: return "sentseq";
  }
}

inline std::optional<ModelKind> model_kind_from_name(const std::string& s) {
  for (ModelKind k : {ModelKind::Majority, ModelKind::Baseline, ModelKind::EGrid, ModelKind::EGraph,
                      ModelKind::EGridConv, ModelKind::LexGraph, ModelKind::Clique, ModelKind::SentAvg,
                      ModelKind::ParSeq, ModelKind::SentSeq})
    if (s == model_kind_name(k)) return k;
  return std::nullopt;
}

inline bool is_neural(ModelKind k) {
  return k == ModelKind::EGridConv || k == ModelKind::Clique || k == ModelKind::SentAvg ||
         k == ModelKind::ParSeq || k == ModelKind::SentSeq;
}

// Parameter bundle for one model run, conventional knob names throughout.
struct ModelSpec {
  ModelKind kind = ModelKind::Majority;
  // entity grid
  int sequence_length = 2;
  std::optional<int> salience_threshold;
  bool syntax = true;
  // entity graph
  GraphMode graph_type = GraphMode::Syntactic;
  bool distance = false;
  // lexgraph
  double sim_threshold = 0.5;
  int subgraph_k = 3;
  // forests
  int n_trees = 100;
  // neural
  ModelConfig nn;
  TrainOptions train_options;
};

// ---------------------------------------------------------------------------
// Processed corpus: everything models consume, computed once per record.

struct ProcessedRecord {
  RawRecord raw;
  Document doc;
  std::vector<EntityMentionSet> entities;
  EntityGrid grid;  // syntax-on master grid; collapse handles syntax-off
  EncodedDoc encoded;
  std::vector<std::vector<double>> sent_max_sim;  // max token-pair cosine per sentence pair
  double fk = 0.0;

  int n_sentences() const { return doc.n_sentences(); }
};

inline ProcessedRecord process_record(const RawRecord& raw, const EmbeddingTable* embeddings,
                                      EntityMode mode = EntityMode::IdenticalNoun,
                                      const AnnotationSidecar* sidecar = nullptr) {
  ProcessedRecord rec;
  rec.raw = raw;
  rec.doc = segment(raw.body, raw.text_id);
  rec.entities = extract_entities(rec.doc, mode, sidecar);
  rec.grid = build_grid(rec.doc, rec.entities, /*syntax_on=*/true);
  rec.fk = grade_level(rec.doc);
  if (embeddings) {
    rec.encoded = encode_document(rec.doc, *embeddings);
    attach_grid(rec.encoded, rec.grid);
    const int n = rec.doc.n_sentences();
    rec.sent_max_sim.assign(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<const std::vector<double>*>> vecs(n);
    for (int i = 0; i < n; ++i)
      for (const auto& t : rec.doc.sentences[i].tokens)
        if (embeddings->contains(t.lower)) vecs[i].push_back(&embeddings->lookup(t.lower));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double best = -1.0;
        for (const auto* a : vecs[i])
          for (const auto* b : vecs[j]) best = std::max(best, cosine_similarity(*a, *b));
        rec.sent_max_sim[i][j] = rec.sent_max_sim[j][i] = best;
      }
  }
  return rec;
}

inline std::vector<ProcessedRecord> process_records(const std::vector<RawRecord>& raws,
                                                    const EmbeddingTable* embeddings,
                                                    EntityMode mode = EntityMode::IdenticalNoun,
                                                    const AnnotationSidecar* sidecar = nullptr) {
  std::vector<ProcessedRecord> out;
  out.reserve(raws.size());
  for (const auto& r : raws) out.push_back(process_record(r, embeddings, mode, sidecar));
  return out;
}

// A record or one of its sentence reorderings.
struct DocView {
  const ProcessedRecord* rec = nullptr;
  const std::vector<int>* order = nullptr;  // nullptr = original order
};

namespace evaldet {

inline EntityGrid view_grid(const DocView& v, bool syntax_on) {
  EntityGrid g = v.order ? v.rec->grid.rows_permuted(*v.order) : v.rec->grid;
  if (!syntax_on)
    for (auto& col : g.columns)
      for (auto& c : col)
        if (c != '-') c = 'X';
  return g;
}

inline std::vector<double> grid_features(const DocView& v, const ModelSpec& spec) {
  const auto grid = view_grid(v, spec.syntax);
  return transition_features(grid, spec.sequence_length, spec.salience_threshold).values;
}

inline double egraph_view_score(const DocView& v, const ModelSpec& spec) {
  return egraph_score_from_grid(view_grid(v, true), spec.graph_type, spec.distance);
}

inline SubgraphHistogram lex_histogram(const DocView& v, const ModelSpec& spec) {
  const auto& sim = v.rec->sent_max_sim;
  const int n = v.rec->n_sentences();
  SentenceGraph g;
  g.n = n;
  g.adj.assign(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int a = v.order ? (*v.order)[i] : i;
      const int b = v.order ? (*v.order)[j] : j;
      g.adj[i][j] = sim[a][b] > spec.sim_threshold;
    }
  return subgraph_histogram(g, spec.subgraph_k, spec.sim_threshold);
}

inline EncodedDoc view_encoded(const DocView& v) {
  return v.order ? reorder_encoded(v.rec->encoded, *v.order) : v.rec->encoded;
}

}  // namespace evaldet

// ---------------------------------------------------------------------------
// One trained model, usable across the four task protocols.

class TrainedModel {
 public:
  ModelSpec spec;
  Task task = Task::Classify3;
  int n_classes = 3;

  // fitted state; which members are live depends on the model kind
  int majority_class = 0;
  ThresholdFit thresholds;
  BinaryThresholdFit binary_cut;
  RandomForest forest;
  std::vector<std::uint64_t> lex_vocab;
  std::shared_ptr<NeuralModel> net;
  TrainResult train_result;  // neural kinds: per-epoch loss trace

  // scalar coherence score; higher = more coherent
  double score(const DocView& v) const {
    switch (spec.kind) {
      case ModelKind::Majority: return static_cast<double>(majority_class);
      case ModelKind::Baseline: return v.rec->fk;
      case ModelKind::EGraph: return evaldet::egraph_view_score(v, spec);
      case ModelKind::EGrid:
      case ModelKind::LexGraph: {
        const auto dist = forest_dist(v);
        return expected_value(dist);
      }
      default: {
        const auto enc = evaldet::view_encoded(v);
        if (task == Task::Ordering && spec.kind != ModelKind::Clique) return net->predict_score(enc);
        const auto dist = net->predict_distribution(enc);
        return expected_value(dist);
      }
    }
  }

  std::vector<double> distribution(const DocView& v) const {
    switch (spec.kind) {
      case ModelKind::Majority: {
        std::vector<double> d(n_classes, 0.0);
        d[majority_class] = 1.0;
        return d;
      }
      case ModelKind::Baseline:
      case ModelKind::EGraph: {
        std::vector<double> d(n_classes, 0.0);
        const double s = spec.kind == ModelKind::Baseline ? v.rec->fk : evaldet::egraph_view_score(v, spec);
        if (n_classes == 2) {
          d[binary_cut.positive_below == (s <= binary_cut.cut) ? 1 : 0] = 1.0;
        } else {
          d[static_cast<int>(apply_thresholds(s, thresholds)) - 1] = 1.0;
        }
        return d;
      }
      case ModelKind::EGrid:
      case ModelKind::LexGraph: return forest_dist(v);
      default: {
        const auto enc = evaldet::view_encoded(v);
        return net->predict_distribution(enc);
      }
    }
  }

  int label(const DocView& v) const {
    const auto d = distribution(v);
    int best = 0;
    for (std::size_t i = 1; i < d.size(); ++i)
      if (d[i] > d[best]) best = static_cast<int>(i);
    return best;
  }

  std::vector<double> features(const DocView& v) const {
    if (spec.kind == ModelKind::EGrid) return evaldet::grid_features(v, spec);
    if (spec.kind == ModelKind::LexGraph) {
      const auto hist = evaldet::lex_histogram(v, spec);
      std::vector<double> feats(lex_vocab.size(), 0.0);
      for (const auto& [code, freq] : hist.class_freq) {
        const auto it = std::lower_bound(lex_vocab.begin(), lex_vocab.end(), code);
        if (it != lex_vocab.end() && *it == code) feats[it - lex_vocab.begin()] = freq;
      }
      return feats;
    }
    throw DomainError("features: not a feature-vector model");
  }

 private:
  std::vector<double> forest_dist(const DocView& v) const { return forest.predict_dist(features(v)); }

  static double expected_value(const std::vector<double>& dist) {
    if (dist.size() == 2) return dist[0];  // ordering/minority heads: P(class 0)
    double e = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) e += dist[i] * (i + 1);
    return e;
  }
};

// ---------------------------------------------------------------------------
// Checkpointing: text envelope, reloadable bit-exactly (doubles at %.17g).

inline void save_trained_model(const TrainedModel& m, std::ostream& out) {
  out << "cohere-model v1\n";
  out << std::setprecision(17);
  out << "kind " << model_kind_name(m.spec.kind) << '\n';
  out << "task " << task_name(m.task) << '\n';
  out << "n_classes " << m.n_classes << '\n';
  const char graph = m.spec.graph_type == GraphMode::Unweighted
                         ? 'u'
                         : (m.spec.graph_type == GraphMode::SharedCount ? 'w' : 's');
  out << "feature " << m.spec.sequence_length << ' '
      << (m.spec.salience_threshold ? *m.spec.salience_threshold : -1) << ' ' << m.spec.syntax << ' '
      << graph << ' ' << m.spec.distance << ' ' << m.spec.sim_threshold << ' ' << m.spec.subgraph_k
      << ' ' << m.spec.n_trees << '\n';
  const auto& nn = m.spec.nn;
  out << "nncfg " << nn.embedding_dim << ' ' << nn.lstm_dim << ' ' << nn.hidden_dim << ' ' << nn.dropout
      << ' ' << nn.window_size << ' ' << nn.conv_filters << ' ' << nn.conv_window << ' '
      << nn.pool_length << ' ' << nn.role_dim << ' ' << nn.batch_size << '\n';
  out << "majority " << m.majority_class << '\n';
  out << "thresholds " << m.thresholds.t1 << ' ' << m.thresholds.t2 << ' '
      << (m.thresholds.orientation == ThresholdOrientation::Increasing ? 0 : 1) << ' '
      << m.thresholds.train_accuracy << '\n';
  out << "binary " << m.binary_cut.cut << ' ' << m.binary_cut.positive_below << ' '
      << m.binary_cut.train_f << '\n';
  out << "lexvocab " << m.lex_vocab.size();
  for (auto code : m.lex_vocab) out << ' ' << code;
  out << '\n';
  const bool has_forest = m.forest.n_trees() > 0;
  out << "forest " << has_forest << '\n';
  if (has_forest) m.forest.save(out);
  out << "net " << (m.net != nullptr) << '\n';
  if (m.net) m.net->save(out);
}

inline TrainedModel load_trained_model(std::istream& in) {
  std::string magic, version;
  in >> magic >> version;
  if (magic != "cohere-model" || version != "v1") throw ParseError("checkpoint: bad header");
  TrainedModel m;
  std::string tag;
  while (in >> tag) {
    if (tag == "kind") {
      std::string name;
      in >> name;
      const auto kind = model_kind_from_name(name);
      if (!kind) throw ParseError("checkpoint: unknown model kind " + name);
      m.spec.kind = *kind;
    } else if (tag == "task") {
      std::string name;
      in >> name;
      const auto task = task_from_name(name);
      if (!task) throw ParseError("checkpoint: unknown task " + name);
      m.task = *task;
    } else if (tag == "n_classes") {
      in >> m.n_classes;
    } else if (tag == "feature") {
      int salience = -1, syntax = 1, distance = 0;
      char graph = 's';
      in >> m.spec.sequence_length >> salience >> syntax >> graph >> distance >> m.spec.sim_threshold >>
          m.spec.subgraph_k >> m.spec.n_trees;
      m.spec.salience_threshold = salience < 0 ? std::nullopt : std::optional<int>(salience);
      m.spec.syntax = syntax != 0;
      m.spec.distance = distance != 0;
      m.spec.graph_type = graph == 'u' ? GraphMode::Unweighted
                                       : (graph == 'w' ? GraphMode::SharedCount : GraphMode::Syntactic);
    } else if (tag == "nncfg") {
      auto& nn = m.spec.nn;
      in >> nn.embedding_dim >> nn.lstm_dim >> nn.hidden_dim >> nn.dropout >> nn.window_size >>
          nn.conv_filters >> nn.conv_window >> nn.pool_length >> nn.role_dim >> nn.batch_size;
    } else if (tag == "majority") {
      in >> m.majority_class;
    } else if (tag == "thresholds") {
      int orient = 0;
      in >> m.thresholds.t1 >> m.thresholds.t2 >> orient >> m.thresholds.train_accuracy;
      m.thresholds.orientation = orient == 0 ? ThresholdOrientation::Increasing : ThresholdOrientation::Decreasing;
    } else if (tag == "binary") {
      in >> m.binary_cut.cut >> m.binary_cut.positive_below >> m.binary_cut.train_f;
    } else if (tag == "lexvocab") {
      std::size_t n = 0;
      in >> n;
      m.lex_vocab.resize(n);
      for (auto& code : m.lex_vocab) in >> code;
    } else if (tag == "forest") {
      bool has = false;
      in >> has;
      if (has) m.forest.load(in);
    } else if (tag == "net") {
      bool has = false;
      in >> has;
      if (has) m.net = std::make_shared<NeuralModel>(NeuralModel::load(in));
      break;
    } else {
      throw ParseError("checkpoint: unexpected tag '" + tag + "'");
    }
  }
  if (!in && m.spec.kind == ModelKind::Majority && m.n_classes == 0)
    throw ParseError("checkpoint: truncated");
  return m;
}

// ---------------------------------------------------------------------------
// Fitting
//
// Classification-style tasks (classify3, score_predict, minority) fit on
// labeled records. The ordering task has its own fit that consumes
// original/permuted pairs.

namespace evaldet {

inline std::vector<std::uint64_t> collect_lex_vocab(const std::vector<const ProcessedRecord*>& records,
                                                    const ModelSpec& spec) {
  std::set<std::uint64_t> codes;
  for (const auto* rec : records) {
    const auto hist = lex_histogram(DocView{rec, nullptr}, spec);
    for (const auto& [code, freq] : hist.class_freq) codes.insert(code);
  }
  return {codes.begin(), codes.end()};
}

}  // namespace evaldet

inline TrainedModel fit_classifier(const ModelSpec& spec,
                                   const std::vector<const ProcessedRecord*>& train_recs,
                                   const std::vector<int>& labels, int n_classes, Task task,
                                   std::uint64_t seed,
                                   const std::vector<const ProcessedRecord*>* val_records = nullptr,
                                   const std::vector<int>* val_labels = nullptr) {
  if (train_recs.empty() || train_recs.size() != labels.size())
    throw DomainError("fit_classifier: empty or misaligned training data");
  TrainedModel model;
  model.spec = spec;
  model.task = task;
  model.n_classes = n_classes;

  switch (spec.kind) {
    case ModelKind::Majority: {
      std::vector<int> counts(n_classes, 0);
      for (int y : labels) ++counts[y];
      model.majority_class =
          static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      break;
    }
    case ModelKind::Baseline:
    case ModelKind::EGraph: {
      std::vector<double> scores;
      scores.reserve(train_recs.size());
      for (const auto* rec : train_recs)
        scores.push_back(spec.kind == ModelKind::Baseline
                             ? rec->fk
                             : evaldet::egraph_view_score(DocView{rec, nullptr}, spec));
      if (n_classes == 2) {
        std::vector<bool> positive;
        for (int y : labels) positive.push_back(y == 1);
        model.binary_cut = fit_threshold_binary(scores, positive, 0.5);
      } else {
        std::vector<Coherence> coh;
        for (int y : labels) coh.push_back(static_cast<Coherence>(y + 1));
        model.thresholds = fit_thresholds(scores, coh);
      }
      break;
    }
    case ModelKind::EGrid:
    case ModelKind::LexGraph: {
      if (spec.kind == ModelKind::LexGraph)
        model.lex_vocab = evaldet::collect_lex_vocab(train_recs, spec);
      std::vector<std::vector<double>> X;
      X.reserve(train_recs.size());
      for (const auto* rec : train_recs) X.push_back(model.features(DocView{rec, nullptr}));
      model.forest.train(X, labels, n_classes, spec.n_trees, seed);
      break;
    }
    default: {  // neural
      ModelConfig cfg = spec.nn;
      cfg.arch = spec.kind == ModelKind::EGridConv ? Arch::EGridConv
                 : spec.kind == ModelKind::Clique  ? Arch::Clique
                 : spec.kind == ModelKind::SentAvg ? Arch::SentAvg
                 : spec.kind == ModelKind::ParSeq  ? Arch::ParSeq
                                                   : Arch::SentSeq;
      cfg.n_classes = n_classes;
      cfg.seed = seed;
      model.net = std::make_shared<NeuralModel>(cfg);
      std::vector<TrainExample> examples;
      for (std::size_t i = 0; i < train_recs.size(); ++i) {
        if (model.net->degenerate_input(train_recs[i]->encoded)) continue;  // entity-less grid doc
        if (cfg.arch == Arch::Clique) {
          for (auto& clique : model.net->clique_positions(train_recs[i]->n_sentences()))
            examples.push_back(TrainExample::clique_example(&train_recs[i]->encoded, clique, labels[i]));
        } else {
          examples.push_back(TrainExample::document(&train_recs[i]->encoded, labels[i]));
        }
      }
      if (examples.empty()) throw DomainError("fit_classifier: no usable training examples");
      std::vector<TrainExample> val_examples;
      if (val_records && val_labels) {
        for (std::size_t i = 0; i < val_records->size(); ++i)
          val_examples.push_back(TrainExample::document(&(*val_records)[i]->encoded, (*val_labels)[i]));
      }
      model.train_result = train(*model.net, examples, spec.train_options, seed,
                                 val_examples.empty() ? nullptr : &val_examples);
      break;
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Ordering task

struct OrderingDataset {
  std::vector<const ProcessedRecord*> records;        // high-coherence, n >= 2
  std::vector<std::vector<Permutation>> permutations; // aligned with records
  int pair_count = 0;
};

inline OrderingDataset build_ordering_dataset(const std::vector<ProcessedRecord>& records, int count,
                                              std::uint64_t seed,
                                              RaterSource source = RaterSource::Expert) {
  OrderingDataset ds;
  for (const auto& rec : records) {
    if (consensus_label(ratings_for(rec.raw, source), source).value != Coherence::High) continue;
    auto perms = generate_permutations(rec.raw.text_id, rec.n_sentences(), count, seed);
    if (perms.empty()) continue;  // skip signal: no distinct reordering
    ds.pair_count += static_cast<int>(perms.size());
    ds.records.push_back(&rec);
    ds.permutations.push_back(std::move(perms));
  }
  return ds;
}

inline TrainedModel fit_ordering(const ModelSpec& spec, const OrderingDataset& train_ds,
                                 std::uint64_t seed) {
  TrainedModel model;
  model.spec = spec;
  model.task = Task::Ordering;
  model.n_classes = 2;

  switch (spec.kind) {
    case ModelKind::EGraph:
      break;  // intrinsic score, nothing to fit
    case ModelKind::EGrid:
    case ModelKind::LexGraph: {
      if (spec.kind == ModelKind::LexGraph)
        model.lex_vocab = evaldet::collect_lex_vocab(train_ds.records, spec);
      std::vector<std::vector<double>> X;
      std::vector<int> y;
      for (std::size_t i = 0; i < train_ds.records.size(); ++i) {
        X.push_back(model.features(DocView{train_ds.records[i], nullptr}));
        y.push_back(0);
        for (const auto& perm : train_ds.permutations[i]) {
          X.push_back(model.features(DocView{train_ds.records[i], &perm.order}));
          y.push_back(1);
        }
      }
      if (X.empty()) throw DomainError("fit_ordering: empty ordering dataset");
      model.forest.train(X, y, 2, spec.n_trees, seed);
      break;
    }
    case ModelKind::Clique: {
      ModelConfig cfg = spec.nn;
      cfg.arch = Arch::Clique;
      cfg.n_classes = 2;
      cfg.seed = seed;
      model.net = std::make_shared<NeuralModel>(cfg);
      std::vector<TrainExample> examples;
      for (std::size_t i = 0; i < train_ds.records.size(); ++i) {
        const auto* rec = train_ds.records[i];
        for (auto& clique : model.net->clique_positions(rec->n_sentences()))
          examples.push_back(TrainExample::clique_example(&rec->encoded, clique, 0));
        for (auto& clique : model.net->clique_negatives(rec->n_sentences(), seed ^ (i * 2654435761ULL)))
          examples.push_back(TrainExample::clique_example(&rec->encoded, clique, 1));
      }
      if (examples.empty()) throw DomainError("fit_ordering: no clique examples");
      model.train_result = train(*model.net, examples, spec.train_options, seed);
      break;
    }
    case ModelKind::SentSeq:
    case ModelKind::EGridConv: {
      ModelConfig cfg = spec.nn;
      cfg.arch = spec.kind == ModelKind::SentSeq ? Arch::SentSeq : Arch::EGridConv;
      cfg.n_classes = 1;  // scalar score head for pair ranking
      cfg.seed = seed;
      model.net = std::make_shared<NeuralModel>(cfg);
      std::vector<EncodedDoc> perm_docs;
      std::size_t total = 0;
      for (const auto& perms : train_ds.permutations) total += perms.size();
      perm_docs.reserve(total);
      std::vector<TrainExample> examples;
      for (std::size_t i = 0; i < train_ds.records.size(); ++i) {
        const auto* rec = train_ds.records[i];
        if (model.net->degenerate_input(rec->encoded)) continue;
        for (const auto& perm : train_ds.permutations[i]) {
          perm_docs.push_back(reorder_encoded(rec->encoded, perm.order));
          examples.push_back(TrainExample::pair(&rec->encoded, &perm_docs.back()));
        }
      }
      if (examples.empty()) throw DomainError("fit_ordering: no pairs");
      model.train_result = train(*model.net, examples, spec.train_options, seed);
      break;
    }
    default:
      throw DomainError(std::string("fit_ordering: model ignores sentence order: ") +
                        model_kind_name(spec.kind));
  }
  return model;
}

inline double ordering_accuracy(const TrainedModel& model, const OrderingDataset& ds) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(ds.pair_count);
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const double orig = model.score(DocView{ds.records[i], nullptr});
    for (const auto& perm : ds.permutations[i])
      pairs.push_back({orig, model.score(DocView{ds.records[i], &perm.order})});
  }
  return ordering_pair_accuracy(pairs);
}

// ---------------------------------------------------------------------------
// Task labels

inline std::vector<int> classify_labels(const std::vector<ProcessedRecord>& records, RaterSource source) {
  std::vector<int> labels;
  labels.reserve(records.size());
  for (const auto& rec : records)
    labels.push_back(static_cast<int>(consensus_label(ratings_for(rec.raw, source), source).value) - 1);
  return labels;
}

inline std::vector<int> minority_labels(const std::vector<ProcessedRecord>& records) {
  std::vector<int> labels;  // 1 = low (positive), 0 = not_low
  labels.reserve(records.size());
  for (const auto& rec : records)
    labels.push_back(minority_relabel(rec.raw.expert_ratings) == MinorityLabel::Low ? 1 : 0);
  return labels;
}

inline std::vector<double> gold_mean_scores(const std::vector<ProcessedRecord>& records) {
  std::vector<double> gold;
  gold.reserve(records.size());
  for (const auto& rec : records)
    gold.push_back(consensus_label(rec.raw.expert_ratings).mean_score);
  return gold;
}

// ---------------------------------------------------------------------------
// Multi-seed reports

struct EvalReport {
  Task task = Task::Classify3;
  std::string model;
  std::string train_domain;
  std::string test_domain;
  RaterSource labels = RaterSource::Expert;
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed;  // task metric per seed
  double mean = 0.0;
  double stddev = 0.0;
  // minority extras from the last seed's run
  double precision = 0.0;
  double recall = 0.0;
  // seeds whose run aborted (training divergence); report stays partial
  std::vector<std::string> failures;
};

namespace evaldet {

inline std::vector<const ProcessedRecord*> pointers(const std::vector<ProcessedRecord>& v) {
  std::vector<const ProcessedRecord*> out;
  out.reserve(v.size());
  for (const auto& r : v) out.push_back(&r);
  return out;
}

inline void finalize(EvalReport& report) {
  report.mean = mean_of(report.per_seed);
  report.stddev = stddev_of(report.per_seed);
}

}  // namespace evaldet

// classify3: accuracy of the consensus-label classifier on test.
inline EvalReport eval_classify(const ModelSpec& spec, const std::vector<ProcessedRecord>& train_recs,
                                const std::vector<ProcessedRecord>& test_recs, RaterSource source,
                                int n_seeds, std::uint64_t master_seed) {
  EvalReport report;
  report.task = Task::Classify3;
  report.model = model_kind_name(spec.kind);
  report.labels = source;
  const auto train_ptr = evaldet::pointers(train_recs);
  const auto y_train = classify_labels(train_recs, source);
  const auto y_test = classify_labels(test_recs, source);
  const int runs = is_neural(spec.kind) ? n_seeds : 1;
  for (int s = 0; s < runs; ++s) {
    const std::uint64_t seed = master_seed + s;
    try {
      auto model = fit_classifier(spec, train_ptr, y_train, 3, Task::Classify3, seed);
      std::vector<int> pred;
      pred.reserve(test_recs.size());
      for (const auto& rec : test_recs) pred.push_back(model.label(DocView{&rec, nullptr}));
      report.seeds.push_back(seed);
      report.per_seed.push_back(accuracy(pred, y_test));
    } catch (const RuntimeFailure& e) {
      report.failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  evaldet::finalize(report);
  return report;
}

// score_predict: Spearman rho between predicted scores and mean expert score.
inline EvalReport eval_score_predict(const ModelSpec& spec, const std::vector<ProcessedRecord>& train_recs,
                                     const std::vector<ProcessedRecord>& test_recs, int n_seeds,
                                     std::uint64_t master_seed) {
  EvalReport report;
  report.task = Task::ScorePredict;
  report.model = model_kind_name(spec.kind);
  const auto train_ptr = evaldet::pointers(train_recs);
  const auto y_train = classify_labels(train_recs, RaterSource::Expert);
  const auto gold = gold_mean_scores(test_recs);
  const int runs = is_neural(spec.kind) ? n_seeds : 1;
  for (int s = 0; s < runs; ++s) {
    const std::uint64_t seed = master_seed + s;
    try {
      auto model = fit_classifier(spec, train_ptr, y_train, 3, Task::ScorePredict, seed);
      std::vector<double> scores;
      scores.reserve(test_recs.size());
      for (const auto& rec : test_recs) scores.push_back(model.score(DocView{&rec, nullptr}));
      const auto rho = spearman(scores, gold);
      report.seeds.push_back(seed);
      report.per_seed.push_back(rho.value_or(0.0));  // constant scorer -> undefined, reported as 0
    } catch (const RuntimeFailure& e) {
      report.failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  evaldet::finalize(report);
  return report;
}

// ordering: pair accuracy on the high-coherence subset.
inline EvalReport eval_ordering(const ModelSpec& spec, const OrderingDataset& train_ds,
                                const OrderingDataset& test_ds, int n_seeds, std::uint64_t master_seed) {
  EvalReport report;
  report.task = Task::Ordering;
  report.model = model_kind_name(spec.kind);
  const int runs = is_neural(spec.kind) ? n_seeds : 1;
  for (int s = 0; s < runs; ++s) {
    const std::uint64_t seed = master_seed + s;
    try {
      auto model = fit_ordering(spec, train_ds, seed);
      report.seeds.push_back(seed);
      report.per_seed.push_back(ordering_accuracy(model, test_ds));
    } catch (const RuntimeFailure& e) {
      report.failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  evaldet::finalize(report);
  return report;
}

// minority: F0.5 of the low-coherence class.
inline EvalReport eval_minority(const ModelSpec& spec, const std::vector<ProcessedRecord>& train_recs,
                                const std::vector<ProcessedRecord>& test_recs, int n_seeds,
                                std::uint64_t master_seed) {
  EvalReport report;
  report.task = Task::Minority;
  report.model = model_kind_name(spec.kind);
  const auto train_ptr = evaldet::pointers(train_recs);
  const auto y_train = minority_labels(train_recs);
  const auto y_test = minority_labels(test_recs);
  std::vector<bool> gold;
  for (int y : y_test) gold.push_back(y == 1);
  const int runs = is_neural(spec.kind) ? n_seeds : 1;
  for (int s = 0; s < runs; ++s) {
    const std::uint64_t seed = master_seed + s;
    try {
      auto model = fit_classifier(spec, train_ptr, y_train, 2, Task::Minority, seed);
      std::vector<bool> pred;
      for (const auto& rec : test_recs) pred.push_back(model.label(DocView{&rec, nullptr}) == 1);
      const auto f = f_beta(pred, gold, 0.5);
      report.seeds.push_back(seed);
      report.per_seed.push_back(f.f);
      report.precision = f.precision;
      report.recall = f.recall;
    } catch (const RuntimeFailure& e) {
      report.failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  evaldet::finalize(report);
  return report;
}

// ---------------------------------------------------------------------------
// Cross-validation over a parameter grid

struct CrossValidationResult {
  int best_index = 0;
  std::vector<double> grid_means;             // mean fold metric per grid point
  std::vector<std::vector<double>> fold_scores;
};

// fit_eval(grid_index, train_indices, val_indices) -> fold metric.
template <typename FitEval>
CrossValidationResult cross_validate(int grid_size, int folds, int data_size, FitEval&& fit_eval,
                                     std::uint64_t seed) {
  if (grid_size < 1) throw DomainError("cross_validate: empty grid");
  if (folds < 2) throw DomainError("cross_validate: need >= 2 folds");
  if (data_size < folds) throw DomainError("cross_validate: fewer examples than folds");
  std::vector<int> order(data_size);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<int>> fold_of(folds);
  for (int i = 0; i < data_size; ++i) fold_of[i % folds].push_back(order[i]);

  CrossValidationResult result;
  result.fold_scores.assign(grid_size, {});
  for (int g = 0; g < grid_size; ++g) {
    for (int f = 0; f < folds; ++f) {
      std::vector<int> train_idx, val_idx = fold_of[f];
      for (int other = 0; other < folds; ++other)
        if (other != f) train_idx.insert(train_idx.end(), fold_of[other].begin(), fold_of[other].end());
      std::sort(train_idx.begin(), train_idx.end());
      std::sort(val_idx.begin(), val_idx.end());
      result.fold_scores[g].push_back(fit_eval(g, train_idx, val_idx));
    }
    result.grid_means.push_back(mean_of(result.fold_scores[g]));
  }
  result.best_index = 0;
  for (int g = 1; g < grid_size; ++g)
    if (result.grid_means[g] > result.grid_means[result.best_index]) result.best_index = g;
  return result;
}

// ---------------------------------------------------------------------------
// Significance: best neural's per-seed values against the best non-neural
// point value, one-sample Wilcoxon, FDR-adjusted across the compared set.

struct SignificanceEntry {
  std::string domain;
  std::string best_neural;
  double neural_mean = 0.0;
  std::string best_non_neural;
  double non_neural_value = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  bool dagger = false;  // significantly better at alpha
};

inline std::vector<SignificanceEntry> significance_daggers(
    const std::vector<std::pair<std::string, std::vector<EvalReport>>>& per_domain, double alpha = 0.05) {
  std::vector<SignificanceEntry> entries;
  for (const auto& [domain, reports] : per_domain) {
    SignificanceEntry e;
    e.domain = domain;
    bool have_neural = false, have_other = false;
    std::vector<double> best_seed_values;
    for (const auto& r : reports) {
      const auto kind = model_kind_from_name(r.model);
      const bool neural = kind && is_neural(*kind);
      if (neural && (!have_neural || r.mean > e.neural_mean)) {
        have_neural = true;
        e.best_neural = r.model;
        e.neural_mean = r.mean;
        best_seed_values = r.per_seed;
      }
      if (!neural && (!have_other || r.mean > e.non_neural_value)) {
        have_other = true;
        e.best_non_neural = r.model;
        e.non_neural_value = r.mean;
      }
    }
    if (!have_neural || !have_other) continue;
    const auto w = wilcoxon_one_sample(best_seed_values, e.non_neural_value);
    e.p_raw = w.p;
    entries.push_back(e);
  }
  std::vector<double> raw;
  for (const auto& e : entries) raw.push_back(e.p_raw);
  if (!raw.empty()) {
    const auto adjusted = fdr_adjust(raw);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      entries[i].p_adjusted = adjusted[i];
      entries[i].dagger = adjusted[i] < alpha && entries[i].neural_mean > entries[i].non_neural_value;
    }
  }
  return entries;
}

}  // namespace cohere
