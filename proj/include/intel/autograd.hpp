#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "intel/rng.hpp"
#include "intel/types.hpp"

namespace intel::ad {

using Mat = Eigen::MatrixXd;

// Handle to one node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape over dense matrices. Values are computed eagerly as the
// graph is built; backward() walks nodes in reverse creation order, which is
// a topological order by construction.
class Tape {
 public:
  Var leaf(Mat value, bool requires_grad = false);
  Var scalar(double v) { return leaf(Mat::Constant(1, 1, v), false); }

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  Var rsub_scalar(Var a, double s);  // s - a
  Var emul(Var a, Var b);
  Var ediv(Var a, Var b);
  Var matmul(Var a, Var b);     // a * b
  Var matmul_nt(Var a, Var b);  // a * b^T
  Var matmul_tn(Var a, Var b);  // a^T * b
  Var linear(Var x, Var w, Var bias);  // x * w^T + 1 bias^T; w: out x in, bias: out x 1
  Var transpose(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var square(Var a);
  Var softplus(Var a);
  Var softmax_rows(Var a);
  Var rowsum(Var a);  // N x M -> N x 1
  Var sum(Var a);     // -> 1 x 1
  Var mean(Var a);    // -> 1 x 1
  Var gather_rows(Var a, std::vector<int> idx);
  Var concat_cols(Var a, Var b);
  Var broadcast_row(Var a, int rows);  // 1 x d -> rows x d
  Var pairwise_diff(Var a);            // N x 1 -> N x N, out(i,j) = a_i - a_j

  const Mat& value(Var v) const { return nodes_[static_cast<size_t>(v.id)].value; }
  const Mat& grad(Var v) const;
  bool needs_grad(Var v) const { return nodes_[static_cast<size_t>(v.id)].needs_grad; }

  // Seeds d(root)/d(root) = 1 and accumulates gradients for every node that
  // (transitively) depends on a grad-requiring leaf. Root must be 1x1.
  void backward(Var root);

  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  enum class Op {
    leaf, add, sub, neg, scale, add_scalar, rsub_scalar, emul, ediv,
    matmul, matmul_nt, matmul_tn, linear, transpose_, sigmoid_, tanh_, exp_,
    log_, square_, softplus_, softmax_rows_, rowsum_, sum_, mean_,
    gather_rows_, concat_cols_, broadcast_row_, pairwise_diff_
  };

  struct Node {
    Op op = Op::leaf;
    int a = -1, b = -1, c = -1;
    double aux = 0.0;
    std::vector<int> indices;
    Mat value;
    Mat grad;
    bool needs_grad = false;
  };

  Var push(Node n);
  void accumulate(int id, const Mat& g);
  Node& at(Var v) { return nodes_[static_cast<size_t>(v.id)]; }
  const Node& at(Var v) const { return nodes_[static_cast<size_t>(v.id)]; }

  std::vector<Node> nodes_;
  Mat empty_;
};

// Named parameter bank with Adam state.
class ParamStore {
 public:
  // Registers a parameter if absent; returns its value.
  Mat& add(const std::string& name, int rows, int cols);
  Mat& get(const std::string& name);
  const Mat& get(const std::string& name) const;
  bool has(const std::string& name) const { return params_.count(name) > 0; }

  void init_xavier(const std::string& name, Rng& rng);
  void init_zero(const std::string& name);

  void zero_grad();
  void accumulate_grad(const std::string& name, const Mat& g);
  const Mat& grad(const std::string& name) const;

  // Bias-corrected Adam update over every parameter with an accumulated
  // gradient; `scale` divides the gradient (for batch averaging) and
  // clip_norm > 0 applies global-norm clipping before the update.
  void adam_step(double lr, double scale, double clip_norm = 0.0,
                 double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  std::vector<std::string> names() const;
  size_t total_size() const;
  void reset_optimizer();

  std::map<std::string, Mat>& raw() { return params_; }
  const std::map<std::string, Mat>& raw() const { return params_; }

 private:
  struct Slot {
    Mat m, v;
    bool initialized = false;
  };
  std::map<std::string, Mat> params_;
  std::map<std::string, Mat> grads_;
  std::map<std::string, Slot> adam_;
  int64_t step_ = 0;
};

// Per-forward handle that creates at most one leaf per parameter and reads
// parameter gradients back into the store after backward().
class GraphContext {
 public:
  GraphContext(Tape& tape, ParamStore& store, bool train = true)
      : tape_(&tape), store_(&store), train_(train) {}

  Var param(const std::string& name);
  Var constant(const Mat& value) { return tape_->leaf(value, false); }
  Tape& tape() { return *tape_; }
  bool training() const { return train_; }

  // Copies tape gradients of every touched parameter into the store.
  void collect_grads();

 private:
  Tape* tape_;
  ParamStore* store_;
  bool train_;
  std::map<std::string, Var> cache_;
};

}  // namespace intel::ad
