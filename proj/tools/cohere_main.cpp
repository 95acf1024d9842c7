// Batch command-line front end: corpus checks and statistics, permutation
// dataset generation, model training/evaluation, per-text prediction,
// annotator agreement, and significance testing. Deterministic given config
// and seeds; machine-readable outputs carry a format-version line.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cohere/config.hpp"
#include "cohere/report.hpp"
#include "cohere/synth.hpp"

namespace fs = std::filesystem;
using namespace cohere;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

struct LoadedDomain {
  std::vector<ProcessedRecord> train;
  std::vector<ProcessedRecord> test;
};

EmbeddingTable load_embeddings_if_any(const RunConfig& rc) {
  if (rc.embeddings_path.empty()) return EmbeddingTable(rc.embedding_dim);
  return load_embeddings_file(rc.embeddings_path, rc.embedding_dim);
}

bool needs_embeddings(ModelKind kind) {
  return kind == ModelKind::LexGraph || is_neural(kind);
}

std::vector<RawRecord> load_domain_split(const RunConfig& rc, Domain d, Split split) {
  const auto& paths = split == Split::Train ? rc.train_paths : rc.test_paths;
  auto it = paths.find(d);
  if (it == paths.end())
    throw ConfigError(std::string("no ") + (split == Split::Train ? "train" : "test") +
                      " path configured for domain " + domain_name(d));
  return load_corpus(it->second, rc.columns, d, split);
}

LoadedDomain load_processed(const RunConfig& rc, Domain d, const EmbeddingTable* table) {
  const AnnotationSidecar* sidecar = nullptr;
  AnnotationSidecar sidecar_data;
  if (!rc.sidecar_path.empty()) {
    sidecar_data = load_sidecar_file(rc.sidecar_path);
    sidecar = &sidecar_data;
  }
  LoadedDomain out;
  out.train = process_records(load_domain_split(rc, d, Split::Train), table, rc.entity_mode, sidecar);
  out.test = process_records(load_domain_split(rc, d, Split::Test), table, rc.entity_mode, sidecar);
  return out;
}


// ---------------------------------------------------------------------------
// cohere synth

int cmd_synth(const std::string& out_dir, std::uint64_t seed, int dim) {
  fs::create_directories(out_dir);
  for (Domain d : {Domain::Yahoo, Domain::Clinton, Domain::Enron, Domain::Yelp}) {
    for (Split split : {Split::Train, Split::Test}) {
      const auto records = synth::generate_domain(d, split, seed);
      const std::string path = out_dir + "/" + domain_name(d) + "_" +
                               (split == Split::Train ? "train" : "test") + ".csv";
      synth::write_corpus_csv(records, path);
      std::cout << "wrote " << path << " (" << records.size() << " records)\n";
    }
  }
  const std::string embed_path = out_dir + "/embeddings.txt";
  synth::write_synth_embeddings(embed_path, dim, seed);
  std::cout << "wrote " << embed_path << " (dim " << dim << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// cohere corpus validate|stats|permute

int cmd_corpus_validate(const RunConfig& rc) {
  int problems = 0;
  for (Domain d : rc.domains) {
    for (Split split : {Split::Train, Split::Test}) {
      const auto& paths = split == Split::Train ? rc.train_paths : rc.test_paths;
      if (!paths.count(d)) continue;
      const std::string which = std::string(domain_name(d)) + (split == Split::Train ? " train" : " test");
      try {
        const auto records = load_corpus(paths.at(d), rc.columns, d, split);
        int bad_bodies = 0;
        for (const auto& r : records) {
          try {
            segment(r.body, r.text_id);
          } catch (const EmptyDocumentError&) {
            ++bad_bodies;
            ++problems;
            std::cerr << which << ": record '" << r.text_id << "' has no segmentable text\n";
          }
        }
        std::cout << which << ": " << records.size() << " records ok"
                  << (bad_bodies ? " (" + std::to_string(bad_bodies) + " unsegmentable)" : "") << "\n";
      } catch (const DataError& e) {
        ++problems;
        std::cerr << which << ": " << e.what() << "\n";
      }
    }
  }
  if (problems) {
    std::cerr << problems << " problem(s) found\n";
    return kExitData;
  }
  std::cout << "corpus valid\n";
  return kExitOk;
}

int cmd_corpus_stats(const RunConfig& rc) {
  std::vector<std::vector<std::string>> dist_rows;
  std::ostringstream machine, per_doc;
  machine << kReportFormatVersion << '\n';
  machine << "domain\tsplit\traters\tlow_pct\tmed_pct\thigh_pct\ttypes\ttokens\tdocs\tparagraphs\t"
             "sentences\twords\n";
  per_doc << kReportFormatVersion << '\n';
  per_doc << "text_id\tdomain\tsplit\tparagraphs\tsentences\twords\n";
  for (Domain d : rc.domains) {
    for (Split split : {Split::Train, Split::Test}) {
      const auto& paths = split == Split::Train ? rc.train_paths : rc.test_paths;
      if (!paths.count(d)) continue;
      const auto records = load_domain_split(rc, d, split);
      long long tokens = 0, sentences = 0, paragraphs = 0, words = 0;
      std::set<std::string> types;
      for (const auto& r : records) {
        const auto doc = segment(r.body, r.text_id);
        paragraphs += doc.n_paragraphs();
        sentences += doc.n_sentences();
        words += doc.word_count();
        per_doc << r.text_id << '\t' << domain_name(d) << '\t'
                << (split == Split::Train ? "train" : "test") << '\t' << doc.n_paragraphs() << '\t'
                << doc.n_sentences() << '\t' << doc.word_count() << '\n';
        for (const auto& s : doc.sentences)
          for (const auto& t : s.tokens) {
            ++tokens;
            types.insert(t.lower);
          }
      }
      for (RaterSource source : {RaterSource::Crowd, RaterSource::Expert}) {
        const auto stats = class_distribution(records, source);
        const char* raters = source == RaterSource::Expert ? "expert" : "untrained";
        char low[16], med[16], high[16];
        std::snprintf(low, sizeof low, "%.1f", stats.pct(Coherence::Low));
        std::snprintf(med, sizeof med, "%.1f", stats.pct(Coherence::Medium));
        std::snprintf(high, sizeof high, "%.1f", stats.pct(Coherence::High));
        dist_rows.push_back({domain_name(d), split == Split::Train ? "train" : "test", raters, low, med,
                             high});
        machine << domain_name(d) << '\t' << (split == Split::Train ? "train" : "test") << '\t' << raters
                << '\t' << low << '\t' << med << '\t' << high << '\t' << types.size() << '\t' << tokens
                << '\t' << records.size() << '\t' << paragraphs << '\t' << sentences << '\t' << words
                << '\n';
      }
    }
  }
  std::cout << render_table({"domain", "split", "raters", "low%", "med%", "high%"}, dist_rows);
  write_file_atomic(rc.out_dir + "/corpus_stats.tsv", machine.str());
  write_file_atomic(rc.out_dir + "/per_document_stats.tsv", per_doc.str());
  std::cout << "wrote " << rc.out_dir << "/corpus_stats.tsv\n";
  std::cout << "wrote " << rc.out_dir << "/per_document_stats.tsv\n";
  return kExitOk;
}

int cmd_corpus_permute(const RunConfig& rc) {
  for (Domain d : rc.domains) {
    if (!rc.train_paths.count(d) && !rc.test_paths.count(d)) continue;
    std::ostringstream out;
    out << kReportFormatVersion << '\n';
    out << "text_id\tsplit\tperm_index\tseed\torder\n";
    int texts = 0, perms = 0;
    for (Split split : {Split::Train, Split::Test}) {
      const auto& paths = split == Split::Train ? rc.train_paths : rc.test_paths;
      if (!paths.count(d)) continue;
      const auto records = load_domain_split(rc, d, split);
      const auto high = ordering_subset(records, rc.labels);
      for (const auto& r : high) {
        const auto doc = segment(r.body, r.text_id);
        const auto ps =
            generate_permutations(r.text_id, doc.n_sentences(), rc.permutation_count, rc.master_seed);
        if (ps.empty()) continue;
        ++texts;
        for (std::size_t i = 0; i < ps.size(); ++i) {
          out << r.text_id << '\t' << (split == Split::Train ? "train" : "test") << '\t' << i << '\t'
              << ps[i].seed << '\t';
          for (std::size_t j = 0; j < ps[i].order.size(); ++j)
            out << (j ? " " : "") << ps[i].order[j];
          out << '\n';
          ++perms;
        }
      }
    }
    const std::string path = rc.out_dir + "/permutations_" + domain_name(d) + ".tsv";
    write_file_atomic(path, out.str());
    std::cout << "wrote " << path << " (" << texts << " texts, " << perms << " permutations)\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// cohere features: per-document feature vectors in sparse text form

int cmd_features(const RunConfig& rc) {
  if (rc.model.kind != ModelKind::EGrid && rc.model.kind != ModelKind::LexGraph)
    throw ConfigError("features: model must be egrid or lexgraph");
  const EmbeddingTable table = load_embeddings_if_any(rc);
  const EmbeddingTable* tbl = needs_embeddings(rc.model.kind) ? &table : nullptr;
  if (needs_embeddings(rc.model.kind) && rc.embeddings_path.empty())
    throw ConfigError("features: lexgraph requires embeddings");
  for (Domain d : rc.domains) {
    const auto data = load_processed(rc, d, tbl);
    TrainedModel extractor;
    extractor.spec = rc.model;
    if (rc.model.kind == ModelKind::LexGraph) {
      auto all = evaldet::pointers(data.train);
      for (const auto& r : data.test) all.push_back(&r);
      extractor.lex_vocab = evaldet::collect_lex_vocab(all, rc.model);
    }
    std::ostringstream out;
    out << kReportFormatVersion << '\n';
    for (const auto* split : {&data.train, &data.test})
      for (const auto& rec : *split)
        out << render_feature_vector(rec.raw.text_id, extractor.features(DocView{&rec, nullptr}))
            << '\n';
    const std::string path = rc.out_dir + "/features_" + model_kind_name(rc.model.kind) + "_" +
                             domain_name(d) + ".txt";
    write_file_atomic(path, out.str());
    std::cout << "wrote " << path << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// cohere train

int cmd_train(const RunConfig& rc, bool search) {
  const EmbeddingTable table = load_embeddings_if_any(rc);
  const EmbeddingTable* tbl = needs_embeddings(rc.model.kind) ? &table : nullptr;
  if (needs_embeddings(rc.model.kind) && rc.embeddings_path.empty())
    throw ConfigError("model requires embeddings; set [embeddings] path or COHERE_EMBEDDINGS");

  for (Domain d : rc.domains) {
    const auto data = load_processed(rc, d, tbl);
    ModelSpec spec = rc.model;
    std::ostringstream log;
    log << kReportFormatVersion << '\n';

    if (search && rc.model.kind != ModelKind::Majority) {
      // small built-in grids over the task-relevant knobs
      std::vector<ModelSpec> grid;
      if (rc.model.kind == ModelKind::EGrid) {
        for (int len : {2, 3})
          for (int sal : {-1, 2}) {
            ModelSpec g = spec;
            g.sequence_length = len;
            g.salience_threshold = sal < 0 ? std::nullopt : std::optional<int>(sal);
            grid.push_back(g);
          }
      } else if (rc.model.kind == ModelKind::EGraph) {
        for (GraphMode mode : {GraphMode::Unweighted, GraphMode::SharedCount, GraphMode::Syntactic})
          for (bool dist : {false, true}) {
            ModelSpec g = spec;
            g.graph_type = mode;
            g.distance = dist;
            grid.push_back(g);
          }
      } else if (rc.model.kind == ModelKind::LexGraph) {
        for (double t : {0.5, 0.7, 0.9}) {
          ModelSpec g = spec;
          g.sim_threshold = t;
          grid.push_back(g);
        }
      } else {
        for (double dropout : {0.2, 0.5}) {
          ModelSpec g = spec;
          g.nn.dropout = dropout;
          grid.push_back(g);
        }
      }
      CrossValidationResult cv;
      if (rc.task == Task::Ordering) {
        // fold metric = pair accuracy on the held-out fold's ordering pairs
        cv = cross_validate(
            static_cast<int>(grid.size()), 10, static_cast<int>(data.train.size()),
            [&](int g, const std::vector<int>& train_idx, const std::vector<int>& val_idx) {
              std::vector<ProcessedRecord> tr, va;
              for (int i : train_idx) tr.push_back(data.train[i]);
              for (int i : val_idx) va.push_back(data.train[i]);
              const auto tr_ds = build_ordering_dataset(tr, rc.permutation_count, rc.master_seed, rc.labels);
              const auto va_ds =
                  build_ordering_dataset(va, rc.permutation_count, rc.master_seed + 13, rc.labels);
              if (tr_ds.records.empty() || va_ds.records.empty()) return 0.0;
              const auto model = fit_ordering(grid[g], tr_ds, rc.master_seed);
              return ordering_accuracy(model, va_ds);
            },
            rc.master_seed);
      } else {
        const auto labels = rc.task == Task::Minority ? minority_labels(data.train)
                                                      : classify_labels(data.train, rc.labels);
        const int n_cls = rc.task == Task::Minority ? 2 : 3;
        cv = cross_validate(
            static_cast<int>(grid.size()), 10, static_cast<int>(data.train.size()),
            [&](int g, const std::vector<int>& train_idx, const std::vector<int>& val_idx) {
              std::vector<const ProcessedRecord*> tr;
              std::vector<int> ty;
              for (int i : train_idx) {
                tr.push_back(&data.train[i]);
                ty.push_back(labels[i]);
              }
              auto model = fit_classifier(grid[g], tr, ty, n_cls, rc.task, rc.master_seed);
              int correct = 0;
              for (int i : val_idx)
                if (model.label(DocView{&data.train[i], nullptr}) == labels[i]) ++correct;
              return static_cast<double>(correct) / val_idx.size();
            },
            rc.master_seed);
      }
      spec = grid[cv.best_index];
      log << "grid_point\tfold\tscore\n";
      for (std::size_t g = 0; g < cv.fold_scores.size(); ++g)
        for (std::size_t f = 0; f < cv.fold_scores[g].size(); ++f)
          log << g << '\t' << f << '\t' << reportdet::fmt(cv.fold_scores[g][f]) << '\n';
      log << "best_grid_point\t" << cv.best_index << "\tmean=" << reportdet::fmt(cv.grid_means[cv.best_index])
          << '\n';
    }

    TrainedModel model;
    if (rc.task == Task::Ordering) {
      const auto ds = build_ordering_dataset(data.train, rc.permutation_count, rc.master_seed, rc.labels);
      model = fit_ordering(spec, ds, rc.master_seed);
    } else {
      const auto labels = rc.task == Task::Minority ? minority_labels(data.train)
                                                    : classify_labels(data.train, rc.labels);
      const int n_cls = rc.task == Task::Minority ? 2 : 3;
      model = fit_classifier(spec, evaldet::pointers(data.train), labels, n_cls, rc.task, rc.master_seed);
      if (rc.fixed_threshold1 && rc.fixed_threshold2 &&
          (spec.kind == ModelKind::Baseline || spec.kind == ModelKind::EGraph)) {
        model.thresholds.t1 = *rc.fixed_threshold1;
        model.thresholds.t2 = *rc.fixed_threshold2;
        model.thresholds.orientation = ThresholdOrientation::Increasing;
      }
    }

    if (!model.train_result.loss_trace.empty()) {
      log << "epoch\tloss\n";
      for (std::size_t e = 0; e < model.train_result.loss_trace.size(); ++e)
        log << e << '\t' << reportdet::fmt(model.train_result.loss_trace[e]) << '\n';
    }
    const std::string dir = report_dir(rc.out_dir, rc.task, domain_name(d), model_kind_name(spec.kind));
    fs::create_directories(dir);
    std::ostringstream checkpoint;
    save_trained_model(model, checkpoint);
    write_file_atomic(dir + "/model.ckpt", checkpoint.str());
    write_file_atomic(dir + "/train_log.tsv", log.str());
    std::cout << "trained " << model_kind_name(spec.kind) << " on " << domain_name(d) << " -> " << dir
              << "/model.ckpt\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// cohere evaluate

int cmd_evaluate(const RunConfig& rc) {
  const EmbeddingTable table = load_embeddings_if_any(rc);
  const EmbeddingTable* tbl = needs_embeddings(rc.model.kind) ? &table : nullptr;
  if (needs_embeddings(rc.model.kind) && rc.embeddings_path.empty())
    throw ConfigError("model requires embeddings; set [embeddings] path or COHERE_EMBEDDINGS");

  std::map<Domain, LoadedDomain> data;
  for (Domain d : rc.domains) data[d] = load_processed(rc, d, tbl);

  std::vector<std::vector<std::string>> table_rows;
  auto emit = [&](EvalReport report, const std::string& train_dom, const std::string& test_dom) {
    report.train_domain = train_dom;
    report.test_domain = test_dom;
    const std::string dir = report_dir(rc.out_dir, rc.task, test_dom, report.model);
    const std::string file =
        train_dom == test_dom ? "report.tsv" : "report_from_" + train_dom + ".tsv";
    write_file_atomic(dir + "/" + file, render_eval_report(report));
    char mean[32];
    std::snprintf(mean, sizeof mean, "%.3f", report.mean);
    table_rows.push_back({report.model, train_dom, test_dom, mean});
  };

  if (rc.cross_domain) {
    for (Domain train_d : rc.domains)
      for (Domain test_d : rc.domains) {
        const auto report = eval_classify(rc.model, data[train_d].train, data[test_d].test, rc.labels,
                                          rc.n_seeds, rc.master_seed);
        emit(report, domain_name(train_d), domain_name(test_d));
      }
  } else if (rc.combined) {
    std::vector<ProcessedRecord> combined_train;
    for (Domain d : rc.domains)
      combined_train.insert(combined_train.end(), data[d].train.begin(), data[d].train.end());
    for (Domain test_d : rc.domains) {
      const auto report = eval_classify(rc.model, combined_train, data[test_d].test, rc.labels,
                                        rc.n_seeds, rc.master_seed);
      emit(report, "combined", domain_name(test_d));
    }
  } else {
    for (Domain d : rc.domains) {
      EvalReport report;
      switch (rc.task) {
        case Task::Classify3:
          report = eval_classify(rc.model, data[d].train, data[d].test, rc.labels, rc.n_seeds,
                                 rc.master_seed);
          break;
        case Task::ScorePredict:
          report = eval_score_predict(rc.model, data[d].train, data[d].test, rc.n_seeds, rc.master_seed);
          break;
        case Task::Ordering: {
          const auto train_ds =
              build_ordering_dataset(data[d].train, rc.permutation_count, rc.master_seed, rc.labels);
          const auto test_ds =
              build_ordering_dataset(data[d].test, rc.permutation_count, rc.master_seed + 7919, rc.labels);
          report = eval_ordering(rc.model, train_ds, test_ds, rc.n_seeds, rc.master_seed);
          break;
        }
        case Task::Minority:
          report = eval_minority(rc.model, data[d].train, data[d].test, rc.n_seeds, rc.master_seed);
          break;
      }
      emit(report, domain_name(d), domain_name(d));
    }
  }
  std::cout << render_table({"model", "train", "test", "mean"}, table_rows);
  std::cout << "reports under " << rc.out_dir << "/" << task_name(rc.task) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// cohere predict

int cmd_predict(const std::string& checkpoint_path, const std::vector<std::string>& inputs,
                const std::string& embeddings_path, int embedding_dim, bool flag_low, bool delimited,
                const std::string& out_path) {
  std::ifstream ck(checkpoint_path);
  if (!ck) throw DataError("cannot open checkpoint " + checkpoint_path);
  const TrainedModel model = load_trained_model(ck);
  if (inputs.empty()) throw DataError("predict: no input files");

  EmbeddingTable table(model.spec.nn.embedding_dim);
  const bool wants_embeddings = needs_embeddings(model.spec.kind);
  if (wants_embeddings) {
    if (embeddings_path.empty()) throw ConfigError("predict: model requires --embeddings");
    table = load_embeddings_file(embeddings_path, embedding_dim > 0 ? embedding_dim
                                                                    : model.spec.nn.embedding_dim);
  }

  // one document per file, or a stream per file with documents separated by
  // lines containing only "---"
  std::vector<std::pair<std::string, std::string>> documents;
  for (const auto& path : inputs) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("predict: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();
    if (!delimited) {
      documents.push_back({path, content});
      continue;
    }
    std::istringstream lines(content);
    std::string line, body;
    int index = 0;
    auto flush = [&] {
      if (!configdet::trim(body).empty())
        documents.push_back({path + "#" + std::to_string(index++), body});
      body.clear();
    };
    while (std::getline(lines, line)) {
      if (configdet::trim(line) == "---") flush();
      else body += line + "\n";
    }
    flush();
  }
  if (documents.empty()) throw DataError("predict: no documents in input");

  std::ostringstream out;
  out << kReportFormatVersion << '\n';
  out << "input\tlabel\tscore\tflag\n";
  int rows = 0;
  for (const auto& [id, body] : documents) {
    if (configdet::trim(body).empty()) throw DataError("predict: empty input " + id);
    RawRecord raw;
    raw.text_id = id;
    raw.body = body;
    const auto rec = process_record(raw, wants_embeddings ? &table : nullptr);
    const DocView view{&rec, nullptr};
    const int label = model.label(view);
    const double score = model.score(view);
    std::string label_name;
    if (model.n_classes == 3) label_name = coherence_name(static_cast<Coherence>(label + 1));
    else label_name = label == 1 ? "low" : "not_low";
    const bool flagged = flag_low && ((model.n_classes == 3 && label == 0) ||
                                      (model.n_classes == 2 && label == 1));
    out << id << '\t' << label_name << '\t' << reportdet::fmt(score) << '\t'
        << (flagged ? "LOW_COHERENCE" : "") << '\n';
    ++rows;
  }
  if (out_path.empty()) {
    std::cout << out.str();
  } else {
    write_file_atomic(out_path, out.str());
    std::cout << "wrote " << out_path << " (" << rows << " rows)\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// cohere agreement / significance

int cmd_agreement(const RunConfig& rc, int repeats) {
  for (Domain d : rc.domains) {
    std::vector<std::vector<int>> ratings;
    for (Split split : {Split::Train, Split::Test}) {
      const auto& paths = split == Split::Train ? rc.train_paths : rc.test_paths;
      if (!paths.count(d)) continue;
      for (const auto& r : load_domain_split(rc, d, split))
        ratings.push_back(rc.labels == RaterSource::Expert ? r.expert_ratings : r.crowd_ratings);
    }
    if (ratings.empty()) throw ConfigError(std::string("no data for domain ") + domain_name(d));
    const auto report = simulate_agreement(ratings, repeats, rc.master_seed, rc.labels);
    const std::string path =
        rc.out_dir + "/agreement_" + domain_name(d) + (rc.labels == RaterSource::Expert ? "_expert" : "_crowd") +
        ".tsv";
    write_file_atomic(path, render_agreement_report(domain_name(d), report));
    char line[160];
    std::snprintf(line, sizeof line, "%s: ICC %.3f +/- %.3f, weighted kappa %.3f +/- %.3f (%d repeats)",
                  domain_name(d), report.icc_mean, report.icc_std, report.kappa_mean, report.kappa_std,
                  report.repeats);
    std::cout << line << "\nwrote " << path << "\n";
  }
  return kExitOk;
}

EvalReport read_report_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report " + path);
  std::string line;
  std::getline(in, line);
  if (line != kReportFormatVersion) throw ParseError(path + ": missing format-version line");
  std::getline(in, line);  // header
  EvalReport report;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() < 7) continue;
    report.model = fields[1];
    report.train_domain = fields[2];
    report.test_domain = fields[3];
    if (fields[5] == "mean" || fields[5] == "std") continue;
    report.seeds.push_back(std::stoull(fields[5]));
    report.per_seed.push_back(std::stod(fields[6]));
  }
  report.mean = mean_of(report.per_seed);
  report.stddev = stddev_of(report.per_seed);
  return report;
}

int cmd_significance(const std::vector<std::string>& report_paths, const std::string& out_path,
                     double alpha, std::optional<double> mu) {
  if (report_paths.empty()) throw DataError("significance: no report files");
  std::map<std::string, std::vector<EvalReport>> by_domain;
  for (const auto& path : report_paths) {
    auto report = read_report_file(path);
    by_domain[report.test_domain].push_back(std::move(report));
  }
  if (mu) {
    // explicit reference value: compare the neural reports against mu alone
    for (auto& [domain, reports] : by_domain) {
      std::vector<EvalReport> neural_only;
      for (auto& r : reports) {
        const auto kind = model_kind_from_name(r.model);
        if (kind && is_neural(*kind)) neural_only.push_back(std::move(r));
      }
      EvalReport fixed;
      fixed.model = "mu";
      fixed.test_domain = domain;
      fixed.per_seed = {*mu};
      fixed.seeds = {0};
      fixed.mean = *mu;
      neural_only.push_back(std::move(fixed));
      reports = std::move(neural_only);
    }
  }
  std::vector<std::pair<std::string, std::vector<EvalReport>>> per_domain(by_domain.begin(),
                                                                          by_domain.end());
  const auto entries = significance_daggers(per_domain, alpha);
  const std::string rendered = render_significance(entries);
  if (out_path.empty()) std::cout << rendered;
  else {
    write_file_atomic(out_path, rendered);
    std::cout << "wrote " << out_path << "\n";
  }
  for (const auto& e : entries)
    std::cout << e.domain << ": " << e.best_neural << (e.dagger ? " (dagger)" : " (n.s.)")
              << " adjusted p=" << e.p_adjusted << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discourse coherence scoring and benchmarking toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint, embeddings_path, out_path;
  std::string domain_opt, task_opt, labels_opt;
  std::vector<std::string> inputs, report_paths;
  std::uint64_t seed = 20180101;
  int dim = 32, seeds_opt = -1, repeats = 1000;
  double alpha = 0.05, mu_opt = std::numeric_limits<double>::quiet_NaN();
  bool flag_low = false, search = false, cross_domain = false, combined = false, delimited = false;

  auto* synth_cmd = app.add_subcommand("synth", "generate the bundled synthetic corpus");
  synth_cmd->add_option("--out", out_dir, "output directory")->required();
  synth_cmd->add_option("--seed", seed, "generator seed");
  synth_cmd->add_option("--embedding-dim", dim, "embedding dimensionality");

  auto* corpus_cmd = app.add_subcommand("corpus", "corpus utilities");
  corpus_cmd->require_subcommand(1);
  auto* validate_cmd = corpus_cmd->add_subcommand("validate", "check schema and invariants");
  auto* stats_cmd = corpus_cmd->add_subcommand("stats", "class distributions and counts");
  auto* permute_cmd = corpus_cmd->add_subcommand("permute", "write the ordering permutation dataset");
  for (auto* c : {validate_cmd, stats_cmd, permute_cmd}) {
    c->add_option("--config", config_path, "config file")->required();
    c->add_option("--domain", domain_opt, "restrict to one domain");
    c->add_option("--out", out_dir, "output directory override");
    c->add_option("--seeds", seeds_opt, "seed count override");
    c->add_option("--labels", labels_opt, "expert or crowd");
  }

  auto* train_cmd = app.add_subcommand("train", "train a model per the config");
  train_cmd->add_option("--config", config_path, "config file")->required();
  train_cmd->add_flag("--search", search, "10-fold cross-validated grid search");
  train_cmd->add_option("--domain", domain_opt, "restrict to one domain");
  train_cmd->add_option("--task", task_opt, "task override");
  train_cmd->add_option("--out", out_dir, "output directory override");
  train_cmd->add_option("--labels", labels_opt, "expert or crowd");

  auto* eval_cmd = app.add_subcommand("evaluate", "run a task protocol and emit reports");
  eval_cmd->add_option("--config", config_path, "config file")->required();
  eval_cmd->add_option("--domain", domain_opt, "restrict to one domain");
  eval_cmd->add_option("--task", task_opt, "task override");
  eval_cmd->add_option("--seeds", seeds_opt, "seed count override");
  eval_cmd->add_option("--out", out_dir, "output directory override");
  eval_cmd->add_option("--labels", labels_opt, "expert or crowd");
  eval_cmd->add_flag("--cross-domain", cross_domain, "16-cell cross-domain matrix");
  eval_cmd->add_flag("--combined", combined, "train on all domains combined");

  auto* features_cmd = app.add_subcommand("features", "dump sparse feature vectors");
  features_cmd->add_option("--config", config_path, "config file")->required();
  features_cmd->add_option("--domain", domain_opt, "restrict to one domain");
  features_cmd->add_option("--out", out_dir, "output directory override");

  auto* predict_cmd = app.add_subcommand("predict", "score plain-text documents");
  predict_cmd->add_option("--checkpoint", checkpoint, "trained model checkpoint")->required();
  predict_cmd->add_option("input", inputs, "plain-text files, one document each");
  predict_cmd->add_option("--embeddings", embeddings_path, "embedding file");
  predict_cmd->add_option("--dim", dim, "embedding dimensionality");
  predict_cmd->add_flag("--flag-low", flag_low, "flag predicted low-coherence texts");
  predict_cmd->add_flag("--delimited", delimited, "inputs are streams of documents separated by ---");
  predict_cmd->add_option("--out", out_path, "write rows to file instead of stdout");

  auto* agreement_cmd = app.add_subcommand("agreement", "simulated annotator agreement");
  agreement_cmd->add_option("--config", config_path, "config file")->required();
  agreement_cmd->add_option("--labels", labels_opt, "expert or crowd");
  agreement_cmd->add_option("--repeats", repeats, "simulation repeats");
  agreement_cmd->add_option("--domain", domain_opt, "restrict to one domain");
  agreement_cmd->add_option("--out", out_dir, "output directory override");

  auto* signif_cmd = app.add_subcommand("significance", "Wilcoxon + FDR daggers over reports");
  signif_cmd->add_option("reports", report_paths, "report.tsv files")->required();
  signif_cmd->add_option("--out", out_path, "output file");
  signif_cmd->add_option("--alpha", alpha, "significance level");
  signif_cmd->add_option("--mu", mu_opt, "reference value replacing the best non-neural result");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) return cmd_synth(out_dir, seed, dim);

    RunConfig rc;
    if (!config_path.empty()) {
      rc = build_run_config(parse_config_file(config_path));
      if (!out_dir.empty()) rc.out_dir = out_dir;
      if (!domain_opt.empty()) {
        const auto d = domain_from_name(domain_opt);
        if (!d) throw ConfigError("unknown domain '" + domain_opt + "'");
        rc.domains = {*d};
      }
      if (!task_opt.empty()) {
        const auto t = task_from_name(task_opt);
        if (!t) throw ConfigError("unknown task '" + task_opt + "'");
        rc.task = *t;
      }
      if (!labels_opt.empty()) {
        if (labels_opt == "expert") rc.labels = RaterSource::Expert;
        else if (labels_opt == "crowd") rc.labels = RaterSource::Crowd;
        else throw ConfigError("labels must be expert or crowd");
      }
      if (seeds_opt > 0) rc.n_seeds = seeds_opt;
      if (cross_domain) rc.cross_domain = true;
      if (combined) rc.combined = true;
    }

    if (validate_cmd->parsed()) return cmd_corpus_validate(rc);
    if (stats_cmd->parsed()) return cmd_corpus_stats(rc);
    if (permute_cmd->parsed()) return cmd_corpus_permute(rc);
    if (features_cmd->parsed()) return cmd_features(rc);
    if (train_cmd->parsed()) return cmd_train(rc, search);
    if (eval_cmd->parsed()) return cmd_evaluate(rc);
    if (predict_cmd->parsed())
      return cmd_predict(checkpoint, inputs, embeddings_path, dim, flag_low, delimited, out_path);
    if (agreement_cmd->parsed()) return cmd_agreement(rc, repeats);
    if (signif_cmd->parsed())
      return cmd_significance(report_paths, out_path, alpha,
                              std::isnan(mu_opt) ? std::nullopt : std::optional<double>(mu_opt));
    std::cerr << "no subcommand\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
