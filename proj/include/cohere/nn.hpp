#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cohere/errors.hpp"
#include "cohere/rng.hpp"

namespace cohere::nn {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
  std::size_t size() const { return a.size(); }

  static Matrix column(const std::vector<double>& v) {
    Matrix m(static_cast<int>(v.size()), 1);
    m.a = v;
    return m;
  }
};

// Trainable tensor plus its Adam state. Gradients accumulate across a batch
// and are cleared by the optimizer step.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;

  void init_shape(const std::string& n, int rows, int cols) {
    name = n;
    value = Matrix(rows, cols);
    grad = Matrix(rows, cols);
    adam_m = Matrix(rows, cols);
    adam_v = Matrix(rows, cols);
  }
};

// Reverse-mode tape. Nodes are matrices; ops append nodes whose backward
// closures pull the node's gradient into its parents. Creation order is a
// topological order, so backward is a single reverse sweep.
class Tape {
 public:
  struct Node {
    Matrix val;
    Matrix grad;
    std::function<void(Tape&, Node&)> backward;
  };

  int input(Matrix m) {
    nodes_.push_back(Node{std::move(m), {}, nullptr});
    return last();
  }

  int zeros(int rows, int cols) { return input(Matrix(rows, cols)); }

  int use(Param& p) {
    nodes_.push_back(Node{p.value, {}, nullptr});
    const int id = last();
    param_links_.push_back({id, &p});
    return id;
  }

  const Matrix& value(int id) const { return nodes_[id].val; }

  int matmul(int a, int b) {
    const Matrix& A = nodes_[a].val;
    const Matrix& B = nodes_[b].val;
    if (A.cols != B.rows) throw DomainError("matmul: shape mismatch");
    Matrix C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i)
      for (int k = 0; k < A.cols; ++k) {
        const double aik = A.at(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < B.cols; ++j) C.at(i, j) += aik * B.at(k, j);
      }
    nodes_.push_back(Node{std::move(C), {}, [a, b](Tape& t, Node& n) {
                            const Matrix& A = t.nodes_[a].val;
                            const Matrix& B = t.nodes_[b].val;
                            Matrix& dA = t.grad_of(a, A.rows, A.cols);
                            Matrix& dB = t.grad_of(b, B.rows, B.cols);
                            for (int i = 0; i < A.rows; ++i)
                              for (int j = 0; j < B.cols; ++j) {
                                const double g = n.grad.at(i, j);
                                if (g == 0.0) continue;
                                for (int k = 0; k < A.cols; ++k) {
                                  dA.at(i, k) += g * B.at(k, j);
                                  dB.at(k, j) += g * A.at(i, k);
                                }
                              }
                          }});
    return last();
  }

  int add(int a, int b) {
    const Matrix& A = nodes_[a].val;
    const Matrix& B = nodes_[b].val;
    if (A.rows != B.rows || A.cols != B.cols) throw DomainError("add: shape mismatch");
    Matrix C = A;
    for (std::size_t i = 0; i < C.size(); ++i) C.a[i] += B.a[i];
    nodes_.push_back(Node{std::move(C), {}, [a, b](Tape& t, Node& n) {
                            Matrix& dA = t.grad_of(a, n.grad.rows, n.grad.cols);
                            Matrix& dB = t.grad_of(b, n.grad.rows, n.grad.cols);
                            for (std::size_t i = 0; i < n.grad.size(); ++i) {
                              dA.a[i] += n.grad.a[i];
                              dB.a[i] += n.grad.a[i];
                            }
                          }});
    return last();
  }

  int sigmoid(int a) {
    Matrix C = nodes_[a].val;
    for (auto& x : C.a) x = 1.0 / (1.0 + std::exp(-x));
    nodes_.push_back(Node{std::move(C), {}, [a](Tape& t, Node& n) {
                            Matrix& dA = t.grad_of(a, n.val.rows, n.val.cols);
                            for (std::size_t i = 0; i < n.val.size(); ++i)
                              dA.a[i] += n.grad.a[i] * n.val.a[i] * (1.0 - n.val.a[i]);
                          }});
    return last();
  }

  int tanh_(int a) {
    Matrix C = nodes_[a].val;
    for (auto& x : C.a) x = std::tanh(x);
    nodes_.push_back(Node{std::move(C), {}, [a](Tape& t, Node& n) {
                            Matrix& dA = t.grad_of(a, n.val.rows, n.val.cols);
                            for (std::size_t i = 0; i < n.val.size(); ++i)
                              dA.a[i] += n.grad.a[i] * (1.0 - n.val.a[i] * n.val.a[i]);
                          }});
    return last();
  }

  int relu(int a) {
    Matrix C = nodes_[a].val;
    for (auto& x : C.a) x = x > 0.0 ? x : 0.0;
    nodes_.push_back(Node{std::move(C), {}, [a](Tape& t, Node& n) {
                            Matrix& dA = t.grad_of(a, n.val.rows, n.val.cols);
                            for (std::size_t i = 0; i < n.val.size(); ++i)
                              if (n.val.a[i] > 0.0) dA.a[i] += n.grad.a[i];
                          }});
    return last();
  }

  int hadamard(int a, int b) {
    const Matrix& A = nodes_[a].val;
    const Matrix& B = nodes_[b].val;
    if (A.size() != B.size()) throw DomainError("hadamard: shape mismatch");
    Matrix C = A;
    for (std::size_t i = 0; i < C.size(); ++i) C.a[i] *= B.a[i];
    nodes_.push_back(Node{std::move(C), {}, [a, b](Tape& t, Node& n) {
                            const Matrix& A = t.nodes_[a].val;
                            const Matrix& B = t.nodes_[b].val;
                            Matrix& dA = t.grad_of(a, A.rows, A.cols);
                            Matrix& dB = t.grad_of(b, B.rows, B.cols);
                            for (std::size_t i = 0; i < n.grad.size(); ++i) {
                              dA.a[i] += n.grad.a[i] * B.a[i];
                              dB.a[i] += n.grad.a[i] * A.a[i];
                            }
                          }});
    return last();
  }

  // Column-vector slice: rows [from, from+len) of a [n x 1] node.
  int slice_vec(int a, int from, int len) {
    const Matrix& A = nodes_[a].val;
    Matrix C(len, 1);
    for (int i = 0; i < len; ++i) C.a[i] = A.a[from + i];
    nodes_.push_back(Node{std::move(C), {}, [a, from, len](Tape& t, Node& n) {
                            Matrix& dA = t.grad_of(a, t.nodes_[a].val.rows, 1);
                            for (int i = 0; i < len; ++i) dA.a[from + i] += n.grad.a[i];
                          }});
    return last();
  }

  int concat_vec(const std::vector<int>& parts) {
    int total = 0;
    for (int p : parts) total += nodes_[p].val.rows;
    Matrix C(total, 1);
    int at = 0;
    for (int p : parts)
      for (int i = 0; i < nodes_[p].val.rows; ++i) C.a[at++] = nodes_[p].val.a[i];
    nodes_.push_back(Node{std::move(C), {}, [parts](Tape& t, Node& n) {
                            int at = 0;
                            for (int p : parts) {
                              const int rows = t.nodes_[p].val.rows;
                              Matrix& dP = t.grad_of(p, rows, 1);
                              for (int i = 0; i < rows; ++i) dP.a[i] += n.grad.a[at++];
                            }
                          }});
    return last();
  }

  int mean_many(const std::vector<int>& parts) {
    if (parts.empty()) throw DomainError("mean_many: no inputs");
    Matrix C = nodes_[parts[0]].val;
    for (std::size_t p = 1; p < parts.size(); ++p)
      for (std::size_t i = 0; i < C.size(); ++i) C.a[i] += nodes_[parts[p]].val.a[i];
    const double inv = 1.0 / static_cast<double>(parts.size());
    for (auto& x : C.a) x *= inv;
    nodes_.push_back(Node{std::move(C), {}, [parts, inv](Tape& t, Node& n) {
                            for (int p : parts) {
                              Matrix& dP = t.grad_of(p, n.val.rows, n.val.cols);
                              for (std::size_t i = 0; i < n.grad.size(); ++i)
                                dP.a[i] += n.grad.a[i] * inv;
                            }
                          }});
    return last();
  }

  // Inverted dropout: active only when a generator is supplied.
  int dropout(int a, double rate, Rng* rng) {
    if (rng == nullptr || rate <= 0.0) return a;
    const Matrix& A = nodes_[a].val;
    Matrix mask(A.rows, A.cols);
    const double keep = 1.0 - rate;
    for (auto& m : mask.a) m = rng->next_double() < rate ? 0.0 : 1.0 / keep;
    const int mask_id = input(std::move(mask));
    return hadamard(a, mask_id);
  }

  // Rows gathered from an embedding matrix: out[t] = embed[ids[t]].
  int rows_from_embedding(Param& embed, const std::vector<int>& ids) {
    const int id = use(embed);
    const int dim = embed.value.cols;
    Matrix C(static_cast<int>(ids.size()), dim);
    for (std::size_t t = 0; t < ids.size(); ++t)
      for (int j = 0; j < dim; ++j) C.at(static_cast<int>(t), j) = embed.value.at(ids[t], j);
    nodes_.push_back(Node{std::move(C), {}, [id, ids, dim](Tape& t, Node& n) {
                            Matrix& dE = t.grad_of(id, t.nodes_[id].val.rows, dim);
                            for (std::size_t r = 0; r < ids.size(); ++r)
                              for (int j = 0; j < dim; ++j)
                                dE.at(ids[r], j) += n.grad.at(static_cast<int>(r), j);
                          }});
    return last();
  }

  // 1-D convolution over rows: input [T x E], filters [F x (window*E)],
  // bias [F x 1] -> [T-window+1 x F]. Requires T >= window.
  int conv1d(int x, int filters, int bias, int window) {
    const Matrix& X = nodes_[x].val;
    const Matrix& W = nodes_[filters].val;
    const Matrix& B = nodes_[bias].val;
    const int E = X.cols;
    const int F = W.rows;
    const int T_out = X.rows - window + 1;
    if (T_out < 1) throw DomainError("conv1d: sequence shorter than window");
    if (W.cols != window * E) throw DomainError("conv1d: filter width mismatch");
    Matrix C(T_out, F);
    for (int t = 0; t < T_out; ++t)
      for (int f = 0; f < F; ++f) {
        double s = B.a[f];
        for (int dt = 0; dt < window; ++dt)
          for (int e = 0; e < E; ++e) s += W.at(f, dt * E + e) * X.at(t + dt, e);
        C.at(t, f) = s;
      }
    nodes_.push_back(Node{std::move(C), {}, [x, filters, bias, window, E, F, T_out](Tape& t, Node& n) {
                            const Matrix& X = t.nodes_[x].val;
                            const Matrix& W = t.nodes_[filters].val;
                            Matrix& dX = t.grad_of(x, X.rows, X.cols);
                            Matrix& dW = t.grad_of(filters, W.rows, W.cols);
                            Matrix& dB = t.grad_of(bias, F, 1);
                            for (int tt = 0; tt < T_out; ++tt)
                              for (int f = 0; f < F; ++f) {
                                const double g = n.grad.at(tt, f);
                                if (g == 0.0) continue;
                                dB.a[f] += g;
                                for (int dt = 0; dt < window; ++dt)
                                  for (int e = 0; e < E; ++e) {
                                    dW.at(f, dt * E + e) += g * X.at(tt + dt, e);
                                    dX.at(tt + dt, e) += g * W.at(f, dt * E + e);
                                  }
                              }
                          }});
    return last();
  }

  // Temporal max pooling over non-overlapping row windows of length `p`
  // (last window may be partial): [T x F] -> [ceil(T/p) x F].
  int maxpool_rows(int a, int p) {
    const Matrix& A = nodes_[a].val;
    const int T_out = (A.rows + p - 1) / p;
    Matrix C(T_out, A.cols);
    std::vector<int> argmax(static_cast<std::size_t>(T_out) * A.cols);
    for (int w = 0; w < T_out; ++w)
      for (int j = 0; j < A.cols; ++j) {
        int best = w * p;
        for (int r = w * p; r < std::min((w + 1) * p, A.rows); ++r)
          if (A.at(r, j) > A.at(best, j)) best = r;
        argmax[static_cast<std::size_t>(w) * A.cols + j] = best;
        C.at(w, j) = A.at(best, j);
      }
    nodes_.push_back(Node{std::move(C), {}, [a, argmax](Tape& t, Node& n) {
                            Matrix& dA = t.grad_of(a, t.nodes_[a].val.rows, t.nodes_[a].val.cols);
                            for (int w = 0; w < n.val.rows; ++w)
                              for (int j = 0; j < n.val.cols; ++j)
                                dA.at(argmax[static_cast<std::size_t>(w) * n.val.cols + j], j) +=
                                    n.grad.at(w, j);
                          }});
    return last();
  }

  // Mean over rows: [T x F] -> [F x 1].
  int mean_rows(int a) {
    const Matrix& A = nodes_[a].val;
    Matrix C(A.cols, 1);
    for (int j = 0; j < A.cols; ++j) {
      double s = 0.0;
      for (int r = 0; r < A.rows; ++r) s += A.at(r, j);
      C.a[j] = s / A.rows;
    }
    nodes_.push_back(Node{std::move(C), {}, [a](Tape& t, Node& n) {
                            const Matrix& A = t.nodes_[a].val;
                            Matrix& dA = t.grad_of(a, A.rows, A.cols);
                            const double inv = 1.0 / A.rows;
                            for (int j = 0; j < A.cols; ++j)
                              for (int r = 0; r < A.rows; ++r) dA.at(r, j) += n.grad.a[j] * inv;
                          }});
    return last();
  }

  // Row `r` of a [T x F] node as an [F x 1] column.
  int row_as_vec(int a, int r) {
    const Matrix& A = nodes_[a].val;
    Matrix C(A.cols, 1);
    for (int j = 0; j < A.cols; ++j) C.a[j] = A.at(r, j);
    nodes_.push_back(Node{std::move(C), {}, [a, r](Tape& t, Node& n) {
                            const Matrix& A = t.nodes_[a].val;
                            Matrix& dA = t.grad_of(a, A.rows, A.cols);
                            for (int j = 0; j < A.cols; ++j) dA.at(r, j) += n.grad.a[j];
                          }});
    return last();
  }

  // Cross-entropy of softmax(logits) against `target`; scalar node.
  int softmax_xent(int logits, int target) {
    const Matrix& L = nodes_[logits].val;
    std::vector<double> probs = softmax(L.a);
    Matrix C(1, 1);
    C.a[0] = -std::log(std::max(probs[target], 1e-300));
    nodes_.push_back(Node{std::move(C), {}, [logits, target, probs](Tape& t, Node& n) {
                            Matrix& dL = t.grad_of(logits, static_cast<int>(probs.size()), 1);
                            for (std::size_t i = 0; i < probs.size(); ++i)
                              dL.a[i] += n.grad.a[0] *
                                         (probs[i] - (static_cast<int>(i) == target ? 1.0 : 0.0));
                          }});
    return last();
  }

  // Logistic ranking loss on two scalar scores: softplus(perm - orig).
  int rank_loss(int orig, int perm) {
    const double d = nodes_[perm].val.a[0] - nodes_[orig].val.a[0];
    Matrix C(1, 1);
    C.a[0] = d > 30.0 ? d : std::log1p(std::exp(d));
    nodes_.push_back(Node{std::move(C), {}, [orig, perm, d](Tape& t, Node& n) {
                            const double s = 1.0 / (1.0 + std::exp(-d));
                            t.grad_of(perm, 1, 1).a[0] += n.grad.a[0] * s;
                            t.grad_of(orig, 1, 1).a[0] -= n.grad.a[0] * s;
                          }});
    return last();
  }

  int add_scalars(const std::vector<int>& parts) { return mean_scaled(parts, 1.0); }

  // (sum of scalar nodes) * scale; used for batch-mean losses.
  int mean_scaled(const std::vector<int>& parts, double scale) {
    Matrix C(1, 1);
    for (int p : parts) C.a[0] += nodes_[p].val.a[0];
    C.a[0] *= scale;
    nodes_.push_back(Node{std::move(C), {}, [parts, scale](Tape& t, Node& n) {
                            for (int p : parts) t.grad_of(p, 1, 1).a[0] += n.grad.a[0] * scale;
                          }});
    return last();
  }

  void backward(int loss_id) {
    grad_of(loss_id, 1, 1).a[0] = 1.0;
    for (int i = loss_id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.backward || n.grad.size() == 0) continue;
      n.backward(*this, n);
    }
    for (const auto& [id, param] : param_links_) {
      const Matrix& g = nodes_[id].grad;
      if (g.size() == 0) continue;
      for (std::size_t i = 0; i < g.size(); ++i) param->grad.a[i] += g.a[i];
    }
  }

  static std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = logits[0];
    for (double x : logits) mx = std::max(mx, x);
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      out[i] = std::exp(logits[i] - mx);
      total += out[i];
    }
    for (auto& x : out) x /= total;
    return out;
  }

 private:
  int last() const { return static_cast<int>(nodes_.size()) - 1; }

  Matrix& grad_of(int id, int rows, int cols) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Matrix(rows, cols);
    return n.grad;
  }

  std::vector<Node> nodes_;
  std::vector<std::pair<int, Param*>> param_links_;
};

// ---------------------------------------------------------------------------
// Parameter store + Adam

class ParamStore {
 public:
  Param& create(const std::string& name, int rows, int cols) {
    auto [it, inserted] = params_.try_emplace(name);
    if (inserted) it->second.init_shape(name, rows, cols);
    return it->second;
  }

  Param& at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw DomainError("param not found: " + name);
    return it->second;
  }

  bool has(const std::string& name) const { return params_.count(name) > 0; }

  std::map<std::string, Param>& all() { return params_; }
  const std::map<std::string, Param>& all() const { return params_; }

  void zero_grads() {
    for (auto& [name, p] : params_) std::fill(p.grad.a.begin(), p.grad.a.end(), 0.0);
  }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& [name, p] : params_) n += p.value.size();
    return n;
  }

 private:
  std::map<std::string, Param> params_;
};

// Adaptive moment estimation with global-norm gradient clipping.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr = 1e-3, double clip_norm = 5.0)
      : lr_(lr), clip_norm_(clip_norm) {}

  void step(ParamStore& params) {
    ++t_;
    double norm_sq = 0.0;
    for (const auto& [name, p] : params.all())
      for (double g : p.grad.a) norm_sq += g * g;
    const double norm = std::sqrt(norm_sq);
    const double scale = (clip_norm_ > 0.0 && norm > clip_norm_) ? clip_norm_ / norm : 1.0;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (auto& [name, p] : params.all()) {
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = p.grad.a[i] * scale;
        p.adam_m.a[i] = beta1_ * p.adam_m.a[i] + (1.0 - beta1_) * g;
        p.adam_v.a[i] = beta2_ * p.adam_v.a[i] + (1.0 - beta2_) * g * g;
        p.value.a[i] -= lr_ * (p.adam_m.a[i] / bc1) / (std::sqrt(p.adam_v.a[i] / bc2) + eps_);
      }
      std::fill(p.grad.a.begin(), p.grad.a.end(), 0.0);
    }
  }

 private:
  double lr_;
  double clip_norm_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
};

}  // namespace cohere::nn
