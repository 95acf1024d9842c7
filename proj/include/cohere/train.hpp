#pragma once

#include <cmath>
#include <numeric>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cohere/models.hpp"
#include "cohere/nn.hpp"

namespace cohere {

enum class Objective { ClassXent, PairRank };

struct TrainExample {
  enum class Kind { Doc, Clique, Pair };
  Kind kind = Kind::Doc;
  const EncodedDoc* doc = nullptr;  // Doc/Clique input; Pair original
  std::vector<int> clique;          // Kind::Clique only
  int label = 0;                    // Doc/Clique only
  const EncodedDoc* perm = nullptr; // Kind::Pair only

  static TrainExample document(const EncodedDoc* d, int label) {
    TrainExample e;
    e.kind = Kind::Doc;
    e.doc = d;
    e.label = label;
    return e;
  }
  static TrainExample clique_example(const EncodedDoc* d, std::vector<int> clique, int label) {
    TrainExample e;
    e.kind = Kind::Clique;
    e.doc = d;
    e.clique = std::move(clique);
    e.label = label;
    return e;
  }
  static TrainExample pair(const EncodedDoc* orig, const EncodedDoc* perm) {
    TrainExample e;
    e.kind = Kind::Pair;
    e.doc = orig;
    e.perm = perm;
    return e;
  }
};

struct TrainOptions {
  int max_epochs = 30;
  int patience = 5;  // early stopping on validation; <= 0 disables
  double lr = 1e-3;
  double clip_norm = 5.0;
  int batch_size = 16;
};

struct TrainResult {
  std::vector<double> loss_trace;  // per-epoch mean training loss
  int epochs_run = 0;
  double best_validation = 0.0;
  bool early_stopped = false;
};

namespace traindet {

inline double example_loss(NeuralModel& model, nn::Tape& tape, const TrainExample& ex, Rng* dropout_rng,
                           bool run_backward) {
  int loss = -1;
  switch (ex.kind) {
    case TrainExample::Kind::Doc:
      loss = tape.softmax_xent(model.forward_logits(tape, *ex.doc, dropout_rng), ex.label);
      break;
    case TrainExample::Kind::Clique:
      loss = tape.softmax_xent(model.forward_clique(tape, *ex.doc, ex.clique, dropout_rng), ex.label);
      break;
    case TrainExample::Kind::Pair: {
      const int orig = model.forward_logits(tape, *ex.doc, dropout_rng);
      const int perm = model.forward_logits(tape, *ex.perm, dropout_rng);
      loss = tape.rank_loss(orig, perm);
      break;
    }
  }
  if (run_backward) tape.backward(loss);
  return tape.value(loss).a[0];
}

inline bool example_correct(NeuralModel& model, const TrainExample& ex) {
  switch (ex.kind) {
    case TrainExample::Kind::Doc: {
      const auto dist = model.predict_distribution(*ex.doc);
      int best = 0;
      for (std::size_t i = 1; i < dist.size(); ++i)
        if (dist[i] > dist[best]) best = static_cast<int>(i);
      return best == ex.label;
    }
    case TrainExample::Kind::Clique: {
      nn::Tape tape;
      const int logits = model.forward_clique(tape, *ex.doc, ex.clique, nullptr);
      const auto dist = nn::Tape::softmax(tape.value(logits).a);
      int best = 0;
      for (std::size_t i = 1; i < dist.size(); ++i)
        if (dist[i] > dist[best]) best = static_cast<int>(i);
      return best == ex.label;
    }
    case TrainExample::Kind::Pair:
      return model.predict_score(*ex.doc) > model.predict_score(*ex.perm);
  }
  return false;
}

}  // namespace traindet

inline double evaluate_accuracy(NeuralModel& model, const std::vector<TrainExample>& examples) {
  if (examples.empty()) return 0.0;
  int correct = 0;
  for (const auto& ex : examples)
    if (traindet::example_correct(model, ex)) ++correct;
  return static_cast<double>(correct) / examples.size();
}

// Mini-batch Adam with seeded shuffling and dropout; deterministic given the
// seed. Early stopping restores the best-validation parameters. Non-finite
// loss aborts with TrainingDiverged.
inline TrainResult train(NeuralModel& model, const std::vector<TrainExample>& examples,
                         const TrainOptions& options, std::uint64_t seed,
                         const std::vector<TrainExample>* validation = nullptr) {
  if (examples.empty()) throw DomainError("train: empty dataset");
  model.init_params(seed);
  nn::AdamOptimizer optimizer(options.lr, options.clip_norm);
  Rng shuffle_rng(seed ^ 0x5151515151515151ULL);
  Rng dropout_rng(seed ^ 0xd40d40d40d40d40dULL);

  TrainResult result;
  std::map<std::string, nn::Matrix> best_params;
  double best_metric = -1.0;
  int stale_epochs = 0;

  std::vector<int> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t at = 0;
    while (at < order.size()) {
      const std::size_t batch_end = std::min(at + static_cast<std::size_t>(options.batch_size), order.size());
      const double inv_batch = 1.0 / static_cast<double>(batch_end - at);
      model.params().zero_grads();
      for (std::size_t i = at; i < batch_end; ++i) {
        nn::Tape tape;
        epoch_loss += traindet::example_loss(model, tape, examples[order[i]], &dropout_rng, true);
      }
      for (auto& [name, p] : model.params().all())
        for (auto& g : p.grad.a) g *= inv_batch;
      optimizer.step(model.params());
      at = batch_end;
    }
    epoch_loss /= static_cast<double>(examples.size());
    if (!std::isfinite(epoch_loss))
      throw TrainingDiverged("training loss became non-finite at epoch " + std::to_string(epoch));
    result.loss_trace.push_back(epoch_loss);
    result.epochs_run = epoch + 1;

    if (validation && options.patience > 0) {
      const double metric = evaluate_accuracy(model, *validation);
      if (metric > best_metric) {
        best_metric = metric;
        stale_epochs = 0;
        best_params.clear();
        for (const auto& [name, p] : model.params().all()) best_params[name] = p.value;
      } else if (++stale_epochs >= options.patience) {
        result.early_stopped = true;
        break;
      }
    }
  }
  if (!best_params.empty()) {
    for (auto& [name, p] : model.params().all()) p.value = best_params[name];
    result.best_validation = best_metric;
  }
  return result;
}

}  // namespace cohere
