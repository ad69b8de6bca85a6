#ifndef SCENEGEN_NN_GRAPH_HPP_
#define SCENEGEN_NN_GRAPH_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "scenegen/types.hpp"

namespace scenegen::nn {

template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// true = query row may attend to key column.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Gradients = std::vector<MatrixT<Scalar>>;

// Named, ordered parameter tensors.
template <typename Scalar>
class ParameterSet {
 public:
  using Matrix = MatrixT<Scalar>;

  int add(const std::string& name, Matrix value) {
    const int id = static_cast<int>(values_.size());
    index_.emplace(name, id);
    names_.push_back(name);
    values_.push_back(std::move(value));
    return id;
  }

  int size() const { return static_cast<int>(values_.size()); }
  const std::string& name(int i) const { return names_[i]; }
  Matrix& value(int i) { return values_[i]; }
  const Matrix& value(int i) const { return values_[i]; }

  int index(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw Error(ErrorCode::kShapeMismatch, "unknown parameter '" + name + "'");
    }
    return it->second;
  }
  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  Matrix& operator[](const std::string& name) { return values_[index(name)]; }
  const Matrix& operator[](const std::string& name) const { return values_[index(name)]; }

  Gradients<Scalar> zeros_like() const {
    Gradients<Scalar> out;
    out.reserve(values_.size());
    for (const auto& v : values_) out.push_back(Matrix::Zero(v.rows(), v.cols()));
    return out;
  }

  Eigen::Index total_size() const {
    Eigen::Index n = 0;
    for (const auto& v : values_) n += v.size();
    return n;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
  std::unordered_map<std::string, int> index_;
};

/// Row-wise softmax restricted to mask-true entries; masked entries get
/// probability exactly 0. Every row must allow at least one entry.
template <typename Derived>
MatrixT<typename Derived::Scalar> masked_softmax(const Eigen::MatrixBase<Derived>& logits,
                                                 const Mask& mask) {
  using Scalar = typename Derived::Scalar;
  if (mask.rows() != logits.rows() || mask.cols() != logits.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "mask shape differs from attention logits");
  }
  MatrixT<Scalar> out = MatrixT<Scalar>::Zero(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Scalar hi = -std::numeric_limits<Scalar>::infinity();
    bool any = false;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      if (!mask(i, j)) continue;
      if (!std::isfinite(logits(i, j))) throw Error(ErrorCode::kNumeric, "attention logit is not finite");
      any = true;
      hi = std::max(hi, logits(i, j));
    }
    if (!any) {
      throw Error(ErrorCode::kShapeMismatch,
                  "attention mask row " + std::to_string(i) + " admits no key");
    }
    Scalar total = 0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      if (mask(i, j)) {
        out(i, j) = std::exp(logits(i, j) - hi);
        total += out(i, j);
      }
    }
    out.row(i) /= total;
  }
  return out;
}

struct Var {
  int id = -1;
};

/// Tape of matrix operations recorded during a forward pass. backward() walks
/// the tape in reverse and returns one gradient per parameter of the bound
/// ParameterSet (zero for parameters the loss does not touch).
template <typename Scalar>
class Graph {
 public:
  using Matrix = MatrixT<Scalar>;

  explicit Graph(const ParameterSet<Scalar>* params = nullptr) : params_(params) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  int size() const { return static_cast<int>(nodes_.size()); }
  bool recorded() const { return !nodes_.empty(); }

  Var constant(Matrix v) { return push(std::move(v), false, nullptr); }

  Var param(int index) {
    if (params_ == nullptr) {
      throw Error(ErrorCode::kGraphNotRecorded, "graph has no parameter set bound");
    }
    auto it = param_leaf_.find(index);
    if (it != param_leaf_.end()) return {it->second};
    Var v = push(params_->value(index), true, nullptr);
    nodes_[v.id].param = index;
    param_leaf_.emplace(index, v.id);
    return v;
  }
  Var param(const std::string& name) { return param(params_->index(name)); }

  Var matmul(Var a, Var b) {
    check_inner(value(a).cols(), value(b).rows(), "matmul");
    Var out = push(value(a) * value(b), any_grad(a, b), nullptr);
    set_backward(out, [a, b](Graph& g, const Matrix& grad) {
      if (g.needs(a)) g.accumulate(a, grad * g.value(b).transpose());
      if (g.needs(b)) g.accumulate(b, g.value(a).transpose() * grad);
    });
    return out;
  }

  // a * b^T
  Var matmul_nt(Var a, Var b) {
    check_inner(value(a).cols(), value(b).cols(), "matmul_nt");
    Var out = push(value(a) * value(b).transpose(), any_grad(a, b), nullptr);
    set_backward(out, [a, b](Graph& g, const Matrix& grad) {
      if (g.needs(a)) g.accumulate(a, grad * g.value(b));
      if (g.needs(b)) g.accumulate(b, grad.transpose() * g.value(a));
    });
    return out;
  }

  Var add(Var a, Var b) {
    check_same(a, b, "add");
    Var out = push(value(a) + value(b), any_grad(a, b), nullptr);
    set_backward(out, [a, b](Graph& g, const Matrix& grad) {
      if (g.needs(a)) g.accumulate(a, grad);
      if (g.needs(b)) g.accumulate(b, grad);
    });
    return out;
  }

  Var sub(Var a, Var b) {
    check_same(a, b, "sub");
    Var out = push(value(a) - value(b), any_grad(a, b), nullptr);
    set_backward(out, [a, b](Graph& g, const Matrix& grad) {
      if (g.needs(a)) g.accumulate(a, grad);
      if (g.needs(b)) g.accumulate(b, -grad);
    });
    return out;
  }

  // Adds a 1 x c row to every row of a.
  Var add_row(Var a, Var row) {
    if (value(row).rows() != 1 || value(row).cols() != value(a).cols()) {
      throw Error(ErrorCode::kShapeMismatch, "add_row: bias must be 1 x cols");
    }
    Matrix v = value(a).rowwise() + value(row).row(0);
    Var out = push(std::move(v), any_grad(a, row), nullptr);
    set_backward(out, [a, row](Graph& g, const Matrix& grad) {
      if (g.needs(a)) g.accumulate(a, grad);
      if (g.needs(row)) g.accumulate(row, grad.colwise().sum());
    });
    return out;
  }

  Var scale(Var a, Scalar s) {
    Var out = push(value(a) * s, needs(a), nullptr);
    set_backward(out, [a, s](Graph& g, const Matrix& grad) { g.accumulate(a, grad * s); });
    return out;
  }

  // s must be 1 x 1.
  Var scale_by(Var a, Var s) {
    if (value(s).size() != 1) throw Error(ErrorCode::kShapeMismatch, "scale_by: 1 x 1 scalar");
    Var out = push(value(s)(0, 0) * value(a), any_grad(a, s), nullptr);
    set_backward(out, [a, s](Graph& g, const Matrix& grad) {
      if (g.needs(a)) g.accumulate(a, g.value(s)(0, 0) * grad);
      if (g.needs(s)) {
        Matrix ds(1, 1);
        ds(0, 0) = grad.cwiseProduct(g.value(a)).sum();
        g.accumulate(s, ds);
      }
    });
    return out;
  }

  // x * sigmoid(x)
  Var silu(Var a) {
    const Matrix& x = value(a);
    Matrix sig = (1 + (-x.array()).exp()).inverse().matrix();
    Matrix v = x.cwiseProduct(sig);
    Var out = push(std::move(v), needs(a), nullptr);
    set_backward(out, [a, sig = std::move(sig)](Graph& g, const Matrix& grad) {
      const auto& x = g.value(a).array();
      g.accumulate(a, (grad.array() * sig.array() * (1 + x * (1 - sig.array()))).matrix());
    });
    return out;
  }

  Var masked_softmax(Var logits, const Mask& mask) {
    Var out = push(nn::masked_softmax(value(logits), mask), needs(logits), nullptr);
    set_backward(out, [logits, out](Graph& g, const Matrix& grad) {
      const Matrix& p = g.value(out);
      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inner =
          grad.cwiseProduct(p).rowwise().sum();
      g.accumulate(logits, p.cwiseProduct(grad.colwise() - inner));
    });
    return out;
  }

  Var gather_rows(Var table, std::vector<int> rows) {
    const Matrix& tv = value(table);
    Matrix v(static_cast<Eigen::Index>(rows.size()), tv.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] < 0 || rows[i] >= tv.rows()) {
        throw Error(ErrorCode::kShapeMismatch, "gather_rows: index out of range");
      }
      v.row(static_cast<Eigen::Index>(i)) = tv.row(rows[i]);
    }
    Var out = push(std::move(v), needs(table), nullptr);
    set_backward(out, [table, rows = std::move(rows)](Graph& g, const Matrix& grad) {
      Matrix dt = Matrix::Zero(g.value(table).rows(), g.value(table).cols());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        dt.row(rows[i]) += grad.row(static_cast<Eigen::Index>(i));
      }
      g.accumulate(table, dt);
    });
    return out;
  }

  // Mean squared error against a constant target; 1 x 1 result.
  Var mse(Var pred, const Matrix& target) {
    const Matrix& p = value(pred);
    if (p.rows() != target.rows() || p.cols() != target.cols()) {
      throw Error(ErrorCode::kShapeMismatch, "mse: target shape differs");
    }
    Matrix diff = p - target;
    Matrix v(1, 1);
    v(0, 0) = diff.squaredNorm() / static_cast<Scalar>(diff.size());
    Var out = push(std::move(v), needs(pred), nullptr);
    set_backward(out, [pred, diff = std::move(diff)](Graph& g, const Matrix& grad) {
      g.accumulate(pred, (2 * grad(0, 0) / static_cast<Scalar>(diff.size())) * diff);
    });
    return out;
  }

  /// Seeds d(loss) = seed * ones and accumulates into every recorded node.
  Gradients<Scalar> backward(Var loss, Scalar seed = 1) {
    if (nodes_.empty() || loss.id < 0 || loss.id >= size()) {
      throw Error(ErrorCode::kGraphNotRecorded, "backward called without a recorded forward");
    }
    for (auto& n : nodes_) n.grad.resize(0, 0);
    Node& root = nodes_[loss.id];
    root.grad = Matrix::Constant(root.value.rows(), root.value.cols(), seed);
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.back || n.grad.size() == 0) continue;
      // Closures only accumulate into earlier nodes, so n.grad stays put.
      n.back(*this, n.grad);
    }
    Gradients<Scalar> grads =
        params_ ? params_->zeros_like() : Gradients<Scalar>{};
    for (const auto& [index, id] : param_leaf_) {
      if (nodes_[id].grad.size() != 0) grads[index] += nodes_[id].grad;
    }
    return grads;
  }

 private:
  using Backward = std::function<void(Graph&, const Matrix&)>;

  struct Node {
    Matrix value;
    Matrix grad;
    Backward back;
    bool needs_grad = false;
    int param = -1;
  };

  Var push(Matrix v, bool needs_grad, Backward back) {
    nodes_.push_back(Node{std::move(v), Matrix(), std::move(back), needs_grad, -1});
    return {static_cast<int>(nodes_.size()) - 1};
  }

  void set_backward(Var v, Backward back) {
    if (nodes_[v.id].needs_grad) nodes_[v.id].back = std::move(back);
  }

  bool needs(Var v) const { return nodes_.at(v.id).needs_grad; }
  bool any_grad(Var a, Var b) const { return needs(a) || needs(b); }

  template <typename Expr>
  void accumulate(Var v, const Expr& g) {
    Node& n = nodes_[v.id];
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  void check_same(Var a, Var b, const char* op) const {
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols()) {
      throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": operand shapes differ");
    }
  }

  static void check_inner(Eigen::Index a, Eigen::Index b, const char* op) {
    if (a != b) throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": inner dims differ");
  }

  const ParameterSet<Scalar>* params_;
  std::vector<Node> nodes_;
  std::unordered_map<int, int> param_leaf_;
};

}  // namespace scenegen::nn

#endif  // SCENEGEN_NN_GRAPH_HPP_
