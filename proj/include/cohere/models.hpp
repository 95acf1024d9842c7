#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cohere/embeddings.hpp"
#include "cohere/grid.hpp"
#include "cohere/nn.hpp"
#include "cohere/textproc.hpp"

namespace cohere {

enum class Arch { SentAvg, ParSeq, SentSeq, Clique, EGridConv };

inline const char* arch_name(Arch a) {
  switch (a) {
    case Arch::SentAvg: return "sentavg";
    case Arch::ParSeq: return "parseq";
    case Arch::SentSeq: return "sentseq";
    case Arch::Clique: return "clique";
    default: return "egridconv";
  }
}

inline std::optional<Arch> arch_from_name(const std::string& s) {
  if (s == "sentavg") return Arch::SentAvg;
  if (s == "parseq") return Arch::ParSeq;
  if (s == "sentseq") return Arch::SentSeq;
  if (s == "clique") return Arch::Clique;
  if (s == "egridconv") return Arch::EGridConv;
  return std::nullopt;
}

struct ModelConfig {
  Arch arch = Arch::SentAvg;
  int embedding_dim = 300;
  int lstm_dim = 100;
  int hidden_dim = 100;
  int n_classes = 3;
  double dropout = 0.5;
  int window_size = 3;    // clique width
  int conv_filters = 100; // egridconv
  int conv_window = 2;
  int pool_length = 3;
  int role_dim = 100;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

// A document reduced to what the neural models consume: per-token embedding
// vectors (frozen) plus paragraph ranges and, for the grid model, entity
// columns as symbol ids (S=0, O=1, X=2, '-'=3).
struct EncodedDoc {
  std::vector<std::vector<const std::vector<double>*>> sentences;
  std::vector<std::pair<int, int>> paragraphs;
  std::vector<std::vector<int>> grid_columns;

  int n_sentences() const { return static_cast<int>(sentences.size()); }
};

inline EncodedDoc encode_document(const Document& doc, const EmbeddingTable& embeddings) {
  EncodedDoc out;
  out.sentences.resize(doc.sentences.size());
  for (std::size_t i = 0; i < doc.sentences.size(); ++i)
    for (const auto& t : doc.sentences[i].tokens) out.sentences[i].push_back(&embeddings.lookup(t.lower));
  out.paragraphs = doc.paragraphs;
  if (out.paragraphs.empty() && !out.sentences.empty())
    out.paragraphs = {{0, static_cast<int>(out.sentences.size())}};
  return out;
}

inline void attach_grid(EncodedDoc& enc, const EntityGrid& grid) {
  enc.grid_columns.clear();
  for (const auto& col : grid.columns) {
    std::vector<int> ids;
    ids.reserve(col.size());
    for (char c : col) ids.push_back(griddet::symbol_index(c));
    enc.grid_columns.push_back(std::move(ids));
  }
}

inline EncodedDoc reorder_encoded(const EncodedDoc& enc, const std::vector<int>& order) {
  EncodedDoc out;
  out.sentences.reserve(order.size());
  for (int i : order) out.sentences.push_back(enc.sentences[i]);
  out.paragraphs = {{0, static_cast<int>(out.sentences.size())}};
  for (const auto& col : enc.grid_columns) {
    std::vector<int> permuted(col.size());
    for (std::size_t i = 0; i < order.size(); ++i) permuted[i] = col[order[i]];
    out.grid_columns.push_back(std::move(permuted));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace nndet {

struct LstmParams {
  nn::Param* w = nullptr;  // [4H x (E+H)], gate order i,f,o,g
  nn::Param* b = nullptr;  // [4H x 1]
};

inline int lstm_encode(nn::Tape& tape, const LstmParams& lstm, const std::vector<int>& inputs,
                       int hidden_dim) {
  int h = tape.zeros(hidden_dim, 1);
  int c = tape.zeros(hidden_dim, 1);
  if (inputs.empty()) return h;  // empty-sequence convention: zero vector
  const int w = tape.use(*lstm.w);
  const int b = tape.use(*lstm.b);
  for (int x : inputs) {
    const int xh = tape.concat_vec({x, h});
    const int z = tape.add(tape.matmul(w, xh), b);
    const int gi = tape.sigmoid(tape.slice_vec(z, 0, hidden_dim));
    const int gf = tape.sigmoid(tape.slice_vec(z, hidden_dim, hidden_dim));
    const int go = tape.sigmoid(tape.slice_vec(z, 2 * hidden_dim, hidden_dim));
    const int gg = tape.tanh_(tape.slice_vec(z, 3 * hidden_dim, hidden_dim));
    c = tape.add(tape.hadamard(gf, c), tape.hadamard(gi, gg));
    h = tape.hadamard(go, tape.tanh_(c));
  }
  return h;
}

}  // namespace nndet

// Parameter bundle plus forward passes for the five architectures. Word
// embeddings stay outside the store — they are frozen inputs by contract.
class NeuralModel {
 public:
  explicit NeuralModel(ModelConfig cfg) : cfg_(cfg) { build_params(); }

  const ModelConfig& config() const { return cfg_; }
  nn::ParamStore& params() { return params_; }

  void init_params(std::uint64_t seed) {
    Rng rng(seed ^ 0xc0ffee123456789ULL);
    for (auto& [name, p] : params_.all()) {
      const bool is_output = name.rfind("out_", 0) == 0;
      const bool is_bias = name.size() >= 2 && name.substr(name.size() - 2) == "_b";
      if (is_output || is_bias) {
        std::fill(p.value.a.begin(), p.value.a.end(), 0.0);
      } else {
        const double r = 1.0 / std::sqrt(static_cast<double>(std::max(p.value.cols, 1)));
        for (auto& x : p.value.a) x = rng.next_range(-r, r);
      }
    }
    // forget-gate bias 1
    for (const char* lstm : {"lstm_word", "lstm_sent", "lstm_par"}) {
      const std::string bname = std::string(lstm) + "_b";
      if (!params_.has(bname)) continue;
      auto& b = params_.at(bname);
      for (int i = cfg_.lstm_dim; i < 2 * cfg_.lstm_dim; ++i) b.value.a[i] = 1.0;
    }
  }

  // Logits for the whole-document architectures (not Clique).
  int forward_logits(nn::Tape& tape, const EncodedDoc& doc, Rng* dropout_rng) {
    switch (cfg_.arch) {
      case Arch::SentAvg: return sentavg_logits(tape, doc, dropout_rng);
      case Arch::ParSeq: return parseq_logits(tape, doc, dropout_rng);
      case Arch::SentSeq: return sentseq_logits(tape, doc, dropout_rng);
      case Arch::EGridConv: return egridconv_logits(tape, doc, dropout_rng);
      case Arch::Clique: throw DomainError("clique uses forward_clique/predict_distribution");
    }
    throw DomainError("unknown architecture");
  }

  // Positive cliques: windows of `window_size` adjacent sentences, or one
  // padded clique when the document is shorter than the window.
  std::vector<std::vector<int>> clique_positions(int n_sentences) const {
    const int k = cfg_.window_size;
    std::vector<std::vector<int>> cliques;
    if (n_sentences >= k) {
      for (int i = 0; i + k <= n_sentences; ++i) {
        std::vector<int> c(k);
        std::iota(c.begin(), c.end(), i);
        cliques.push_back(std::move(c));
      }
    } else {
      // boundary sentinels: PAD_START before, PAD_END after
      std::vector<int> c;
      for (int i = 0; i < n_sentences; ++i) c.push_back(i);
      bool front = true;
      while (static_cast<int>(c.size()) < k) {
        if (front) c.insert(c.begin(), kPadStart);
        else c.push_back(kPadEnd);
        front = !front;
      }
      cliques.push_back(std::move(c));
    }
    return cliques;
  }

  // One negative per positive clique: middle sentence replaced by a
  // seeded-random sentence outside the clique. Empty when no replacement
  // exists (doc has <= window_size sentences).
  std::vector<std::vector<int>> clique_negatives(int n_sentences, std::uint64_t seed) const {
    const int k = cfg_.window_size;
    std::vector<std::vector<int>> negatives;
    if (n_sentences <= k) return negatives;
    Rng rng(seed);
    for (int i = 0; i + k <= n_sentences; ++i) {
      std::vector<int> c(k);
      std::iota(c.begin(), c.end(), i);
      std::vector<int> outside;
      for (int s = 0; s < n_sentences; ++s)
        if (s < i || s >= i + k) outside.push_back(s);
      c[k / 2] = outside[rng.next_below(outside.size())];  // middle slot replaced
      negatives.push_back(std::move(c));
    }
    return negatives;
  }

  int forward_clique(nn::Tape& tape, const EncodedDoc& doc, const std::vector<int>& clique,
                     Rng* dropout_rng) {
    nndet::LstmParams word{&params_.at("lstm_word_w"), &params_.at("lstm_word_b")};
    std::vector<int> vecs;
    for (int s : clique) {
      int v;
      if (s == kPadStart) v = tape.use(params_.at("pad_start"));
      else if (s == kPadEnd) v = tape.use(params_.at("pad_end"));
      else v = nndet::lstm_encode(tape, word, token_refs(tape, doc.sentences[s]), cfg_.lstm_dim);
      vecs.push_back(tape.dropout(v, cfg_.dropout, dropout_rng));
    }
    const int concat = tape.concat_vec(vecs);
    const int hidden = tape.tanh_(dense(tape, "hidden", concat));
    return dense(tape, "out", hidden);
  }

  // A grid model cannot see a document with no entity columns; such inputs
  // get the neutral uniform distribution (score 0.5 in probability space).
  bool degenerate_input(const EncodedDoc& doc) const {
    return cfg_.arch == Arch::EGridConv && doc.grid_columns.empty();
  }

  // Inference distribution (dropout off). Clique averages per-clique
  // distributions; a zero-column grid yields the flagged uniform.
  std::vector<double> predict_distribution(const EncodedDoc& doc) {
    if (degenerate_input(doc))
      return std::vector<double>(cfg_.n_classes, 1.0 / cfg_.n_classes);
    nn::Tape tape;
    if (cfg_.arch == Arch::Clique) {
      std::vector<double> mean(cfg_.n_classes, 0.0);
      const auto cliques = clique_positions(doc.n_sentences());
      for (const auto& c : cliques) {
        const int logits = forward_clique(tape, doc, c, nullptr);
        const auto dist = nn::Tape::softmax(tape.value(logits).a);
        for (int i = 0; i < cfg_.n_classes; ++i) mean[i] += dist[i];
      }
      for (auto& x : mean) x /= static_cast<double>(cliques.size());
      return mean;
    }
    const int logits = forward_logits(tape, doc, nullptr);
    return nn::Tape::softmax(tape.value(logits).a);
  }

  // Scalar coherence score: P(class 0) for 2-class ordering heads, expected
  // label value for 3-class heads, raw logit for 1-unit heads.
  double predict_score(const EncodedDoc& doc) {
    if (cfg_.n_classes == 1) {
      if (degenerate_input(doc)) return 0.0;  // neutral logit
      nn::Tape tape;
      return tape.value(forward_logits(tape, doc, nullptr)).a[0];
    }
    const auto dist = predict_distribution(doc);
    if (cfg_.n_classes == 2) return dist[0];
    double expected = 0.0;
    for (int i = 0; i < cfg_.n_classes; ++i) expected += dist[i] * (i + 1);
    return expected;
  }

  void save(std::ostream& out) const {
    out << "cohere-nn v1\n";
    out << arch_name(cfg_.arch) << ' ' << cfg_.embedding_dim << ' ' << cfg_.lstm_dim << ' '
        << cfg_.hidden_dim << ' ' << cfg_.n_classes << ' ' << cfg_.dropout << ' ' << cfg_.window_size
        << ' ' << cfg_.conv_filters << ' ' << cfg_.conv_window << ' ' << cfg_.pool_length << ' '
        << cfg_.role_dim << ' ' << cfg_.batch_size << ' ' << cfg_.seed << '\n';
    out << std::setprecision(17);
    out << params_.all().size() << '\n';
    for (const auto& [name, p] : params_.all()) {
      out << name << ' ' << p.value.rows << ' ' << p.value.cols;
      for (double x : p.value.a) out << ' ' << x;
      out << '\n';
    }
  }

  static NeuralModel load(std::istream& in) {
    std::string magic, version;
    in >> magic >> version;
    if (magic != "cohere-nn" || version != "v1") throw ParseError("nn: bad checkpoint header");
    std::string arch;
    ModelConfig cfg;
    in >> arch >> cfg.embedding_dim >> cfg.lstm_dim >> cfg.hidden_dim >> cfg.n_classes >> cfg.dropout >>
        cfg.window_size >> cfg.conv_filters >> cfg.conv_window >> cfg.pool_length >> cfg.role_dim >>
        cfg.batch_size >> cfg.seed;
    const auto a = arch_from_name(arch);
    if (!a) throw ParseError("nn: unknown architecture '" + arch + "'");
    cfg.arch = *a;
    NeuralModel model(cfg);
    std::size_t n_params = 0;
    in >> n_params;
    for (std::size_t i = 0; i < n_params; ++i) {
      std::string name;
      int rows = 0, cols = 0;
      in >> name >> rows >> cols;
      auto& p = model.params_.at(name);
      if (p.value.rows != rows || p.value.cols != cols) throw ParseError("nn: shape mismatch for " + name);
      for (auto& x : p.value.a) in >> x;
    }
    if (!in) throw ParseError("nn: truncated checkpoint");
    return model;
  }

  static constexpr int kPadStart = -1;
  static constexpr int kPadEnd = -2;

 private:
  void build_params() {
    const int E = cfg_.embedding_dim;
    const int H = cfg_.lstm_dim;
    switch (cfg_.arch) {
      case Arch::SentAvg:
        add_lstm("lstm_word", E, H);
        add_dense("hidden", H, cfg_.hidden_dim);
        add_dense("out", cfg_.hidden_dim, cfg_.n_classes);
        break;
      case Arch::ParSeq:
        add_lstm("lstm_word", E, H);
        add_lstm("lstm_sent", H, H);
        add_lstm("lstm_par", H, H);
        add_dense("hidden", H, cfg_.hidden_dim);
        add_dense("out", cfg_.hidden_dim, cfg_.n_classes);
        break;
      case Arch::SentSeq:
        add_lstm("lstm_word", E, H);
        add_lstm("lstm_sent", H, H);
        add_dense("hidden", H, cfg_.hidden_dim);
        add_dense("out", cfg_.hidden_dim, cfg_.n_classes);
        break;
      case Arch::Clique:
        add_lstm("lstm_word", E, H);
        params_.create("pad_start", H, 1);
        params_.create("pad_end", H, 1);
        add_dense("hidden", cfg_.window_size * H, cfg_.hidden_dim);
        add_dense("out", cfg_.hidden_dim, cfg_.n_classes);
        break;
      case Arch::EGridConv:
        params_.create("role_embed", 4, cfg_.role_dim);
        params_.create("conv_w", cfg_.conv_filters, cfg_.conv_window * cfg_.role_dim);
        params_.create("conv_b", cfg_.conv_filters, 1);
        add_dense("out", cfg_.conv_filters, cfg_.n_classes);
        break;
    }
  }

  void add_lstm(const std::string& name, int input_dim, int hidden_dim) {
    params_.create(name + "_w", 4 * hidden_dim, input_dim + hidden_dim);
    params_.create(name + "_b", 4 * hidden_dim, 1);
  }

  void add_dense(const std::string& name, int in, int out) {
    params_.create(name + "_w", out, in);
    params_.create(name + "_b", out, 1);
  }

  int dense(nn::Tape& tape, const std::string& name, int x) {
    return tape.add(tape.matmul(tape.use(params_.at(name + "_w")), x), tape.use(params_.at(name + "_b")));
  }

  std::vector<int> token_refs(nn::Tape& tape, const std::vector<const std::vector<double>*>& tokens) {
    std::vector<int> refs;
    refs.reserve(tokens.size());
    for (const auto* v : tokens) refs.push_back(tape.input(nn::Matrix::column(*v)));
    return refs;
  }

  std::vector<int> sentence_vectors(nn::Tape& tape, const EncodedDoc& doc, Rng* dropout_rng) {
    nndet::LstmParams word{&params_.at("lstm_word_w"), &params_.at("lstm_word_b")};
    std::vector<int> vecs;
    vecs.reserve(doc.sentences.size());
    for (const auto& sent : doc.sentences) {
      const int v = nndet::lstm_encode(tape, word, token_refs(tape, sent), cfg_.lstm_dim);
      vecs.push_back(tape.dropout(v, cfg_.dropout, dropout_rng));
    }
    return vecs;
  }

  int head(nn::Tape& tape, int doc_vec, Rng* dropout_rng) {
    const int dropped = tape.dropout(doc_vec, cfg_.dropout, dropout_rng);
    const int hidden = tape.tanh_(dense(tape, "hidden", dropped));
    return dense(tape, "out", hidden);
  }

  int sentavg_logits(nn::Tape& tape, const EncodedDoc& doc, Rng* dropout_rng) {
    if (doc.sentences.empty()) throw DomainError("sentavg: zero sentences");
    return head(tape, tape.mean_many(sentence_vectors(tape, doc, dropout_rng)), dropout_rng);
  }

  int sentseq_logits(nn::Tape& tape, const EncodedDoc& doc, Rng* dropout_rng) {
    if (doc.sentences.empty()) throw DomainError("sentseq: zero sentences");
    nndet::LstmParams sent{&params_.at("lstm_sent_w"), &params_.at("lstm_sent_b")};
    const int doc_vec = nndet::lstm_encode(tape, sent, sentence_vectors(tape, doc, dropout_rng), cfg_.lstm_dim);
    return head(tape, doc_vec, dropout_rng);
  }

  int parseq_logits(nn::Tape& tape, const EncodedDoc& doc, Rng* dropout_rng) {
    if (doc.sentences.empty() || doc.paragraphs.empty()) throw DomainError("parseq: empty document");
    for (const auto& [begin, end] : doc.paragraphs)
      if (end <= begin) throw DomainError("parseq: empty paragraph");
    const auto sents = sentence_vectors(tape, doc, dropout_rng);
    nndet::LstmParams sent{&params_.at("lstm_sent_w"), &params_.at("lstm_sent_b")};
    nndet::LstmParams par{&params_.at("lstm_par_w"), &params_.at("lstm_par_b")};
    std::vector<int> par_vecs;
    for (const auto& [begin, end] : doc.paragraphs) {
      std::vector<int> span(sents.begin() + begin, sents.begin() + end);
      par_vecs.push_back(nndet::lstm_encode(tape, sent, span, cfg_.lstm_dim));
    }
    const int doc_vec = nndet::lstm_encode(tape, par, par_vecs, cfg_.lstm_dim);
    return head(tape, doc_vec, dropout_rng);
  }

  int egridconv_logits(nn::Tape& tape, const EncodedDoc& doc, Rng* dropout_rng) {
    auto& embed = params_.at("role_embed");
    const int conv_w = tape.use(params_.at("conv_w"));
    const int conv_b = tape.use(params_.at("conv_b"));
    std::vector<int> column_feats;
    for (const auto& col : doc.grid_columns) {
      std::vector<int> ids = col;
      while (static_cast<int>(ids.size()) < cfg_.conv_window) ids.push_back(3);  // '-' padding
      const int rows = tape.rows_from_embedding(embed, ids);
      const int conv = tape.relu(tape.conv1d(rows, conv_w, conv_b, cfg_.conv_window));
      const int pooled = tape.maxpool_rows(conv, cfg_.pool_length);
      column_feats.push_back(tape.mean_rows(pooled));
    }
    if (column_feats.empty()) throw DomainError("egridconv: zero-column grid");
    const int doc_feat = tape.dropout(tape.mean_many(column_feats), cfg_.dropout, dropout_rng);
    return dense(tape, "out", doc_feat);
  }

  ModelConfig cfg_;
  nn::ParamStore params_;
};

}  // namespace cohere
