#include "intel/autograd.hpp"

#include <cmath>

namespace intel::ad {

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Mat value, bool requires_grad) {
  Node n;
  n.op = Op::leaf;
  n.value = std::move(value);
  n.needs_grad = requires_grad;
  return push(std::move(n));
}

namespace {

void check_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error::runtime(std::string("autograd ") + op + ": shape mismatch " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

}  // namespace

Var Tape::add(Var a, Var b) {
  check_same_shape(at(a).value, at(b).value, "add");
  Node n;
  n.op = Op::add;
  n.a = a.id;
  n.b = b.id;
  n.value = at(a).value + at(b).value;
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  check_same_shape(at(a).value, at(b).value, "sub");
  Node n;
  n.op = Op::sub;
  n.a = a.id;
  n.b = b.id;
  n.value = at(a).value - at(b).value;
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Var Tape::neg(Var a) {
  Node n;
  n.op = Op::neg;
  n.a = a.id;
  n.value = -at(a).value;
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::scale(Var a, double s) {
  Node n;
  n.op = Op::scale;
  n.a = a.id;
  n.aux = s;
  n.value = at(a).value * s;
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::add_scalar(Var a, double s) {
  Node n;
  n.op = Op::add_scalar;
  n.a = a.id;
  n.aux = s;
  n.value = at(a).value.array() + s;
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::rsub_scalar(Var a, double s) {
  Node n;
  n.op = Op::rsub_scalar;
  n.a = a.id;
  n.aux = s;
  n.value = s - at(a).value.array();
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::emul(Var a, Var b) {
  check_same_shape(at(a).value, at(b).value, "emul");
  Node n;
  n.op = Op::emul;
  n.a = a.id;
  n.b = b.id;
  n.value = at(a).value.cwiseProduct(at(b).value);
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Var Tape::ediv(Var a, Var b) {
  check_same_shape(at(a).value, at(b).value, "ediv");
  Node n;
  n.op = Op::ediv;
  n.a = a.id;
  n.b = b.id;
  n.value = at(a).value.cwiseQuotient(at(b).value);
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  Node n;
  n.op = Op::matmul;
  n.a = a.id;
  n.b = b.id;
  n.value = at(a).value * at(b).value;
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Var Tape::matmul_nt(Var a, Var b) {
  Node n;
  n.op = Op::matmul_nt;
  n.a = a.id;
  n.b = b.id;
  n.value = at(a).value * at(b).value.transpose();
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Var Tape::matmul_tn(Var a, Var b) {
  Node n;
  n.op = Op::matmul_tn;
  n.a = a.id;
  n.b = b.id;
  n.value = at(a).value.transpose() * at(b).value;
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Var Tape::linear(Var x, Var w, Var bias) {
  Node n;
  n.op = Op::linear;
  n.a = x.id;
  n.b = w.id;
  n.c = bias.id;
  n.value = (at(x).value * at(w).value.transpose()).rowwise() +
            at(bias).value.col(0).transpose();
  n.needs_grad = at(x).needs_grad || at(w).needs_grad || at(bias).needs_grad;
  return push(std::move(n));
}

Var Tape::transpose(Var a) {
  Node n;
  n.op = Op::transpose_;
  n.a = a.id;
  n.value = at(a).value.transpose();
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::sigmoid_;
  n.a = a.id;
  n.value = at(a).value.unaryExpr([](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
  });
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::tanh(Var a) {
  Node n;
  n.op = Op::tanh_;
  n.a = a.id;
  n.value = at(a).value.array().tanh();
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::exp(Var a) {
  Node n;
  n.op = Op::exp_;
  n.a = a.id;
  n.value = at(a).value.array().exp();
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::log(Var a) {
  Node n;
  n.op = Op::log_;
  n.a = a.id;
  n.value = at(a).value.array().log();
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::square(Var a) {
  Node n;
  n.op = Op::square_;
  n.a = a.id;
  n.value = at(a).value.array().square();
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::softplus(Var a) {
  Node n;
  n.op = Op::softplus_;
  n.a = a.id;
  n.value = at(a).value.unaryExpr([](double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
  });
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::softmax_rows(Var a) {
  Node n;
  n.op = Op::softmax_rows_;
  n.a = a.id;
  Mat v = at(a).value;
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    double mx = v.row(r).maxCoeff();
    v.row(r) = (v.row(r).array() - mx).exp();
    v.row(r) /= v.row(r).sum();
  }
  n.value = std::move(v);
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::rowsum(Var a) {
  Node n;
  n.op = Op::rowsum_;
  n.a = a.id;
  n.value = at(a).value.rowwise().sum();
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  Node n;
  n.op = Op::sum_;
  n.a = a.id;
  n.value = Mat::Constant(1, 1, at(a).value.sum());
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::mean(Var a) {
  Node n;
  n.op = Op::mean_;
  n.a = a.id;
  n.value = Mat::Constant(1, 1, at(a).value.mean());
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::gather_rows(Var a, std::vector<int> idx) {
  Node n;
  n.op = Op::gather_rows_;
  n.a = a.id;
  const Mat& src = at(a).value;
  Mat v(static_cast<Eigen::Index>(idx.size()), src.cols());
  for (size_t i = 0; i < idx.size(); ++i) {
    v.row(static_cast<Eigen::Index>(i)) = src.row(idx[i]);
  }
  n.indices = std::move(idx);
  n.value = std::move(v);
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::concat_cols(Var a, Var b) {
  const Mat& va = at(a).value;
  const Mat& vb = at(b).value;
  if (va.rows() != vb.rows()) throw Error::runtime("autograd concat_cols: row mismatch");
  Node n;
  n.op = Op::concat_cols_;
  n.a = a.id;
  n.b = b.id;
  Mat v(va.rows(), va.cols() + vb.cols());
  v.leftCols(va.cols()) = va;
  v.rightCols(vb.cols()) = vb;
  n.value = std::move(v);
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Var Tape::broadcast_row(Var a, int rows) {
  const Mat& va = at(a).value;
  if (va.rows() != 1) throw Error::runtime("autograd broadcast_row: input must be 1 x d");
  Node n;
  n.op = Op::broadcast_row_;
  n.a = a.id;
  n.value = va.replicate(rows, 1);
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Var Tape::pairwise_diff(Var a) {
  const Mat& va = at(a).value;
  if (va.cols() != 1) throw Error::runtime("autograd pairwise_diff: input must be N x 1");
  Node n;
  n.op = Op::pairwise_diff_;
  n.a = a.id;
  const Eigen::Index rows = va.rows();
  Mat v(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < rows; ++j) {
      v(i, j) = va(i, 0) - va(j, 0);
    }
  }
  n.value = std::move(v);
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

const Mat& Tape::grad(Var v) const {
  const Node& n = at(v);
  if (n.grad.size() == 0) return empty_;
  return n.grad;
}

void Tape::accumulate(int id, const Mat& g) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var root) {
  Node& r = at(root);
  if (r.value.rows() != 1 || r.value.cols() != 1) {
    throw Error::runtime("autograd backward: root must be a 1x1 scalar");
  }
  if (!r.needs_grad) return;
  r.grad = Mat::Constant(1, 1, 1.0);
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::leaf:
        break;
      case Op::add:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::sub:
        accumulate(n.a, g);
        accumulate(n.b, -g);
        break;
      case Op::neg:
        accumulate(n.a, -g);
        break;
      case Op::scale:
        accumulate(n.a, g * n.aux);
        break;
      case Op::add_scalar:
        accumulate(n.a, g);
        break;
      case Op::rsub_scalar:
        accumulate(n.a, -g);
        break;
      case Op::emul:
        accumulate(n.a, g.cwiseProduct(nodes_[static_cast<size_t>(n.b)].value));
        accumulate(n.b, g.cwiseProduct(nodes_[static_cast<size_t>(n.a)].value));
        break;
      case Op::ediv: {
        const Mat& bv = nodes_[static_cast<size_t>(n.b)].value;
        accumulate(n.a, g.cwiseQuotient(bv));
        accumulate(n.b, -g.cwiseProduct(n.value).cwiseQuotient(bv));
        break;
      }
      case Op::matmul:
        accumulate(n.a, g * nodes_[static_cast<size_t>(n.b)].value.transpose());
        accumulate(n.b, nodes_[static_cast<size_t>(n.a)].value.transpose() * g);
        break;
      case Op::matmul_nt:
        accumulate(n.a, g * nodes_[static_cast<size_t>(n.b)].value);
        accumulate(n.b, g.transpose() * nodes_[static_cast<size_t>(n.a)].value);
        break;
      case Op::matmul_tn:
        accumulate(n.a, nodes_[static_cast<size_t>(n.b)].value * g.transpose());
        accumulate(n.b, nodes_[static_cast<size_t>(n.a)].value * g);
        break;
      case Op::linear: {
        const Mat& x = nodes_[static_cast<size_t>(n.a)].value;
        const Mat& w = nodes_[static_cast<size_t>(n.b)].value;
        accumulate(n.a, g * w);
        accumulate(n.b, g.transpose() * x);
        accumulate(n.c, g.colwise().sum().transpose());
        break;
      }
      case Op::transpose_:
        accumulate(n.a, g.transpose());
        break;
      case Op::sigmoid_:
        accumulate(n.a, g.cwiseProduct(
                            (n.value.array() * (1.0 - n.value.array())).matrix()));
        break;
      case Op::tanh_:
        accumulate(n.a, g.cwiseProduct((1.0 - n.value.array().square()).matrix()));
        break;
      case Op::exp_:
        accumulate(n.a, g.cwiseProduct(n.value));
        break;
      case Op::log_:
        accumulate(n.a, g.cwiseQuotient(nodes_[static_cast<size_t>(n.a)].value));
        break;
      case Op::square_:
        accumulate(n.a, 2.0 * g.cwiseProduct(nodes_[static_cast<size_t>(n.a)].value));
        break;
      case Op::softplus_:
        accumulate(n.a, g.cwiseProduct(nodes_[static_cast<size_t>(n.a)].value.unaryExpr(
                            [](double x) {
                              if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
                              double e = std::exp(x);
                              return e / (1.0 + e);
                            })));
        break;
      case Op::softmax_rows_: {
        Mat ga(n.value.rows(), n.value.cols());
        for (Eigen::Index rr = 0; rr < n.value.rows(); ++rr) {
          double dot = g.row(rr).dot(n.value.row(rr));
          ga.row(rr) = (g.row(rr).array() - dot) * n.value.row(rr).array();
        }
        accumulate(n.a, ga);
        break;
      }
      case Op::rowsum_: {
        const Eigen::Index cols = nodes_[static_cast<size_t>(n.a)].value.cols();
        accumulate(n.a, g.replicate(1, cols));
        break;
      }
      case Op::sum_: {
        const Mat& av = nodes_[static_cast<size_t>(n.a)].value;
        accumulate(n.a, Mat::Constant(av.rows(), av.cols(), g(0, 0)));
        break;
      }
      case Op::mean_: {
        const Mat& av = nodes_[static_cast<size_t>(n.a)].value;
        accumulate(n.a,
                   Mat::Constant(av.rows(), av.cols(),
                                 g(0, 0) / static_cast<double>(av.rows() * av.cols())));
        break;
      }
      case Op::gather_rows_: {
        const Mat& av = nodes_[static_cast<size_t>(n.a)].value;
        Mat ga = Mat::Zero(av.rows(), av.cols());
        for (size_t i = 0; i < n.indices.size(); ++i) {
          ga.row(n.indices[i]) += g.row(static_cast<Eigen::Index>(i));
        }
        accumulate(n.a, ga);
        break;
      }
      case Op::concat_cols_: {
        const Eigen::Index ca = nodes_[static_cast<size_t>(n.a)].value.cols();
        const Eigen::Index cb = nodes_[static_cast<size_t>(n.b)].value.cols();
        accumulate(n.a, g.leftCols(ca));
        accumulate(n.b, g.rightCols(cb));
        break;
      }
      case Op::broadcast_row_:
        accumulate(n.a, g.colwise().sum());
        break;
      case Op::pairwise_diff_: {
        Mat ga = g.rowwise().sum() - g.colwise().sum().transpose();
        accumulate(n.a, ga);
        break;
      }
    }
    // Free intermediate gradient memory early; keep leaf grads for reading.
    if (n.op != Op::leaf && id != root.id) n.grad.resize(0, 0);
  }
}

Mat& ParamStore::add(const std::string& name, int rows, int cols) {
  auto it = params_.find(name);
  if (it != params_.end()) {
    if (it->second.rows() != rows || it->second.cols() != cols) {
      throw Error::runtime("parameter '" + name + "' re-registered with a different shape");
    }
    return it->second;
  }
  return params_.emplace(name, Mat::Zero(rows, cols)).first->second;
}

Mat& ParamStore::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error::runtime("unknown parameter '" + name + "'");
  return it->second;
}

const Mat& ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error::runtime("unknown parameter '" + name + "'");
  return it->second;
}

void ParamStore::init_xavier(const std::string& name, Rng& rng) {
  Mat& m = get(name);
  const double bound = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rng.uniform(-bound, bound);
    }
  }
}

void ParamStore::init_zero(const std::string& name) { get(name).setZero(); }

void ParamStore::zero_grad() { grads_.clear(); }

void ParamStore::accumulate_grad(const std::string& name, const Mat& g) {
  auto it = grads_.find(name);
  if (it == grads_.end()) {
    grads_[name] = g;
  } else {
    it->second += g;
  }
}

const Mat& ParamStore::grad(const std::string& name) const {
  static const Mat kEmpty;
  auto it = grads_.find(name);
  return it == grads_.end() ? kEmpty : it->second;
}

void ParamStore::adam_step(double lr, double scale, double clip_norm, double beta1,
                           double beta2, double eps) {
  if (grads_.empty()) return;
  double clip_scale = 1.0;
  if (clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto& [name, g] : grads_) {
      sq += (g / scale).squaredNorm();
    }
    double norm = std::sqrt(sq);
    if (norm > clip_norm) clip_scale = clip_norm / norm;
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_));
  for (auto& [name, g] : grads_) {
    Mat grad = (g / scale) * clip_scale;
    Slot& slot = adam_[name];
    Mat& p = get(name);
    if (!slot.initialized) {
      slot.m = Mat::Zero(p.rows(), p.cols());
      slot.v = Mat::Zero(p.rows(), p.cols());
      slot.initialized = true;
    }
    slot.m = beta1 * slot.m + (1.0 - beta1) * grad;
    slot.v = beta2 * slot.v + (1.0 - beta2) * grad.cwiseProduct(grad);
    Mat m_hat = slot.m / bc1;
    Mat v_hat = slot.v / bc2;
    p.array() -= lr * m_hat.array() / (v_hat.array().sqrt() + eps);
  }
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

size_t ParamStore::total_size() const {
  size_t n = 0;
  for (const auto& [_, m] : params_) n += static_cast<size_t>(m.size());
  return n;
}

void ParamStore::reset_optimizer() {
  adam_.clear();
  step_ = 0;
}

Var GraphContext::param(const std::string& name) {
  auto it = cache_.find(name);
  if (it != cache_.end()) return it->second;
  Var v = tape_->leaf(store_->get(name), train_);
  cache_[name] = v;
  return v;
}

void GraphContext::collect_grads() {
  for (const auto& [name, var] : cache_) {
    const Mat& g = tape_->grad(var);
    if (g.size() > 0) store_->accumulate_grad(name, g);
  }
}

}  // namespace intel::ad
