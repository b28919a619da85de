// Copyright 2026 The Seq2Biseq Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reverse-mode automatic differentiation over dense Eigen matrices.
//
// A Graph is a tape: every primitive appends a node whose inputs are earlier
// nodes, so index order is a topological order and cycles cannot be built.
// Parameters live outside the graph; their leaf nodes read the parameter value
// in place and backward() accumulates straight into Parameter::grad.
//
// Vectors are n x 1 matrices. All primitives check that their result is
// finite and throw NumericError otherwise.

#ifndef S2B_AUTODIFF_HPP_
#define S2B_AUTODIFF_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace s2b {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A named trainable tensor. The gradient buffer always has the value's shape.
template <typename Scalar>
struct Parameter {
  Parameter(std::string n, Matrix<Scalar> v)
      : name(std::move(n)), value(std::move(v)),
        grad(Matrix<Scalar>::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
  Index size() const { return value.size(); }

  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
};

enum class OpKind : std::uint8_t {
  kConstant,
  kInput,
  kParameter,
  kMatVec,
  kAdd,
  kSub,
  kHadamard,
  kScale,
  kSigmoid,
  kTanh,
  kSumRows,
  kAddN,
  kConcat,
  kLookup,
  kLogSoftmax,
  kNllPick,
  kSquaredNorm,
};

inline const char* op_name(OpKind op);

template <typename Scalar>
class Graph;

// Handle to a node of a Graph. Cheap to copy; only valid while its graph lives.
template <typename Scalar>
class Var {
 public:
  Var() = default;

  Graph<Scalar>& graph() const { return *graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

  const Matrix<Scalar>& value() const { return graph_->value(id_); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Scalar scalar() const { return value()(0, 0); }

 private:
  friend class Graph<Scalar>;
  Var(Graph<Scalar>* graph, int id) : graph_(graph), id_(id) {}

  Graph<Scalar>* graph_ = nullptr;
  int id_ = -1;
};

template <typename Scalar>
class Graph {
 public:
  using MatrixType = Matrix<Scalar>;

  struct Node {
    OpKind op = OpKind::kConstant;
    std::vector<int> inputs;
    MatrixType value;
    MatrixType grad;
    Parameter<Scalar>* param = nullptr;
    bool requires_grad = false;
    Index index = 0;     // row for kLookup, class for kNllPick
    Scalar factor = 1;   // multiplier for kScale
  };

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<Scalar> constant(MatrixType value) {
    Node n;
    n.op = OpKind::kConstant;
    n.value = std::move(value);
    return push(std::move(n));
  }

  // A differentiable leaf owned by the graph; its gradient is read with grad().
  Var<Scalar> input(MatrixType value) {
    Node n;
    n.op = OpKind::kInput;
    n.value = std::move(value);
    n.requires_grad = true;
    return push(std::move(n));
  }

  // Leaf bound to an external parameter. Repeated calls return the same node.
  Var<Scalar> param(Parameter<Scalar>& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
      return Var<Scalar>(this, it->second);
    }
    Node n;
    n.op = OpKind::kParameter;
    n.param = &p;
    n.requires_grad = true;
    Var<Scalar> v = push(std::move(n));
    param_nodes_.emplace(&p, v.id());
    return v;
  }

  const MatrixType& value(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.param != nullptr ? n.param->value : n.value;
  }

  // Gradient of a graph-owned node after backward(); empty if never reached.
  const MatrixType& grad(int id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.param != nullptr ? n.param->grad : n.grad;
  }

  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }

  // Appends a computed node. Used by the primitives below.
  Var<Scalar> record(OpKind op, std::initializer_list<int> inputs,
                     MatrixType value, Index index = 0, Scalar factor = 1) {
    return record(op, std::vector<int>(inputs), std::move(value), index, factor);
  }

  Var<Scalar> record(OpKind op, std::vector<int> inputs, MatrixType value,
                     Index index = 0, Scalar factor = 1) {
    if (!value.allFinite()) {
      throw NumericError(std::string("non-finite result in ") + op_name(op));
    }
    Node n;
    n.op = op;
    n.value = std::move(value);
    n.index = index;
    n.factor = factor;
    for (int in : inputs) {
      if (in < 0 || static_cast<std::size_t>(in) >= nodes_.size()) {
        throw std::logic_error("graph input refers to a node not yet recorded");
      }
      n.requires_grad = n.requires_grad || nodes_[static_cast<std::size_t>(in)].requires_grad;
    }
    n.inputs = std::move(inputs);
    return push(std::move(n));
  }

  // Accumulates d(root)/d(node) into every node that root depends on.
  // Parameter gradients are added to Parameter::grad (callers zero them).
  void backward(Var<Scalar> root) {
    if (root.graph_ != this) throw std::invalid_argument("backward: root from another graph");
    if (root.rows() != 1 || root.cols() != 1) {
      throw ShapeError("backward: root must be a scalar");
    }
    for (Node& n : nodes_) {
      if (n.param == nullptr) n.grad.resize(0, 0);
    }
    accumulator(root.id_).array() += Scalar(1);
    for (int id = root.id_; id >= 0; --id) {
      const Node& n = nodes_[static_cast<std::size_t>(id)];
      if (!n.requires_grad || n.param != nullptr || n.grad.size() == 0) continue;
      propagate(id);
    }
  }

  // Parameters whose leaf nodes the root depends on, in first-use order.
  std::vector<Parameter<Scalar>*> reachable_parameters(Var<Scalar> root) const {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<int> stack{root.id_};
    seen[static_cast<std::size_t>(root.id_)] = 1;
    std::vector<int> param_ids;
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      const Node& n = nodes_[static_cast<std::size_t>(id)];
      if (n.param != nullptr) param_ids.push_back(id);
      for (int in : n.inputs) {
        if (!seen[static_cast<std::size_t>(in)] && nodes_[static_cast<std::size_t>(in)].requires_grad) {
          seen[static_cast<std::size_t>(in)] = 1;
          stack.push_back(in);
        }
      }
    }
    std::sort(param_ids.begin(), param_ids.end());
    std::vector<Parameter<Scalar>*> out;
    out.reserve(param_ids.size());
    for (int id : param_ids) out.push_back(nodes_[static_cast<std::size_t>(id)].param);
    return out;
  }

 private:
  Var<Scalar> push(Node n) {
    nodes_.push_back(std::move(n));
    return Var<Scalar>(this, static_cast<int>(nodes_.size() - 1));
  }

  MatrixType& accumulator(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.param != nullptr) return n.param->grad;
    if (n.grad.size() == 0) n.grad = MatrixType::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  bool wants(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }

  void propagate(int id);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<Scalar>*, int> param_nodes_;
};

template <typename Scalar>
void Graph<Scalar>::propagate(int id) {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  const MatrixType& g = n.grad;
  const auto& in = n.inputs;
  switch (n.op) {
    case OpKind::kConstant:
    case OpKind::kInput:
    case OpKind::kParameter:
      break;
    case OpKind::kMatVec: {
      const MatrixType& w = value(in[0]);
      const MatrixType& x = value(in[1]);
      if (wants(in[0])) accumulator(in[0]).noalias() += g * x.transpose();
      if (wants(in[1])) accumulator(in[1]).noalias() += w.transpose() * g;
      break;
    }
    case OpKind::kAdd:
      if (wants(in[0])) accumulator(in[0]) += g;
      if (wants(in[1])) accumulator(in[1]) += g;
      break;
    case OpKind::kSub:
      if (wants(in[0])) accumulator(in[0]) += g;
      if (wants(in[1])) accumulator(in[1]) -= g;
      break;
    case OpKind::kHadamard: {
      if (wants(in[0])) accumulator(in[0]).array() += g.array() * value(in[1]).array();
      if (wants(in[1])) accumulator(in[1]).array() += g.array() * value(in[0]).array();
      break;
    }
    case OpKind::kScale:
      accumulator(in[0]) += n.factor * g;
      break;
    case OpKind::kSigmoid:
      accumulator(in[0]).array() += g.array() * n.value.array() * (Scalar(1) - n.value.array());
      break;
    case OpKind::kTanh:
      accumulator(in[0]).array() += g.array() * (Scalar(1) - n.value.array().square());
      break;
    case OpKind::kSumRows:
      accumulator(in[0]).rowwise() += g.col(0).transpose();
      break;
    case OpKind::kAddN:
      for (int i : in) {
        if (wants(i)) accumulator(i) += g;
      }
      break;
    case OpKind::kConcat: {
      Index offset = 0;
      for (int i : in) {
        const Index len = value(i).rows();
        if (wants(i)) accumulator(i) += g.middleRows(offset, len);
        offset += len;
      }
      break;
    }
    case OpKind::kLookup:
      accumulator(in[0]).row(n.index) += g.transpose();
      break;
    case OpKind::kLogSoftmax:
      accumulator(in[0]).array() += g.array() - n.value.array().exp() * g.sum();
      break;
    case OpKind::kNllPick:
      accumulator(in[0])(n.index, 0) -= g(0, 0);
      break;
    case OpKind::kSquaredNorm:
      accumulator(in[0]) += (Scalar(2) * g(0, 0)) * value(in[0]);
      break;
  }
}

inline const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::kConstant: return "constant";
    case OpKind::kInput: return "input";
    case OpKind::kParameter: return "parameter";
    case OpKind::kMatVec: return "matvec";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kHadamard: return "hadamard";
    case OpKind::kScale: return "scale";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSumRows: return "sum_rows";
    case OpKind::kAddN: return "add_n";
    case OpKind::kConcat: return "concat";
    case OpKind::kLookup: return "lookup";
    case OpKind::kLogSoftmax: return "log_softmax";
    case OpKind::kNllPick: return "nll_pick";
    case OpKind::kSquaredNorm: return "squared_norm";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Primitives

namespace detail {

template <typename Scalar>
void require_same_graph(const Var<Scalar>& a, const Var<Scalar>& b) {
  if (&a.graph() != &b.graph()) throw std::invalid_argument("operands from different graphs");
}

template <typename Scalar>
void require_same_shape(const Var<Scalar>& a, const Var<Scalar>& b, const char* op) {
  require_same_graph(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
}

template <typename Scalar>
void require_vector(const Var<Scalar>& x, const char* op) {
  if (x.cols() != 1) throw ShapeError(std::string(op) + ": expected a column vector");
}

}  // namespace detail

template <typename Scalar>
Var<Scalar> matvec(const Var<Scalar>& w, const Var<Scalar>& x) {
  detail::require_same_graph(w, x);
  detail::require_vector(x, "matvec");
  if (w.cols() != x.rows()) {
    throw ShapeError("matvec: inner dimensions disagree (" + std::to_string(w.cols()) + " vs " +
                     std::to_string(x.rows()) + ")");
  }
  Matrix<Scalar> out = w.value() * x.value();
  return w.graph().record(OpKind::kMatVec, {w.id(), x.id()}, std::move(out));
}

template <typename Scalar>
Var<Scalar> add(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_shape(a, b, "add");
  return a.graph().record(OpKind::kAdd, {a.id(), b.id()}, a.value() + b.value());
}

template <typename Scalar>
Var<Scalar> sub(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_shape(a, b, "sub");
  return a.graph().record(OpKind::kSub, {a.id(), b.id()}, a.value() - b.value());
}

template <typename Scalar>
Var<Scalar> hadamard(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_shape(a, b, "hadamard");
  return a.graph().record(OpKind::kHadamard, {a.id(), b.id()},
                          a.value().cwiseProduct(b.value()));
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar>& a, Scalar factor) {
  return a.graph().record(OpKind::kScale, {a.id()}, factor * a.value(), 0, factor);
}

template <typename Scalar>
Var<Scalar> sigmoid(const Var<Scalar>& a) {
  Matrix<Scalar> out = (Scalar(1) + (-a.value().array()).exp()).inverse().matrix();
  return a.graph().record(OpKind::kSigmoid, {a.id()}, std::move(out));
}

template <typename Scalar>
Var<Scalar> tanh(const Var<Scalar>& a) {
  Matrix<Scalar> out = a.value().array().tanh().matrix();
  return a.graph().record(OpKind::kTanh, {a.id()}, std::move(out));
}

// Column sums of a matrix, returned as a column vector (one entry per column).
template <typename Scalar>
Var<Scalar> sum_rows(const Var<Scalar>& a) {
  Matrix<Scalar> out = a.value().colwise().sum().transpose();
  return a.graph().record(OpKind::kSumRows, {a.id()}, std::move(out));
}

// Elementwise sum of equally shaped tensors.
template <typename Scalar>
Var<Scalar> add_n(std::span<const Var<Scalar>> parts) {
  if (parts.empty()) throw std::invalid_argument("add_n: empty input");
  Matrix<Scalar> out = parts.front().value();
  std::vector<int> ids{parts.front().id()};
  for (std::size_t i = 1; i < parts.size(); ++i) {
    detail::require_same_shape(parts.front(), parts[i], "add_n");
    out += parts[i].value();
    ids.push_back(parts[i].id());
  }
  return parts.front().graph().record(OpKind::kAddN, std::move(ids), std::move(out));
}

template <typename Scalar>
Var<Scalar> concat(std::span<const Var<Scalar>> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: empty input");
  Index total = 0;
  for (const auto& p : parts) {
    detail::require_same_graph(parts.front(), p);
    detail::require_vector(p, "concat");
    total += p.rows();
  }
  Matrix<Scalar> out(total, 1);
  std::vector<int> ids;
  ids.reserve(parts.size());
  Index offset = 0;
  for (const auto& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
    ids.push_back(p.id());
  }
  return parts.front().graph().record(OpKind::kConcat, std::move(ids), std::move(out));
}

template <typename Scalar>
Var<Scalar> concat(std::initializer_list<Var<Scalar>> parts) {
  return concat(std::span<const Var<Scalar>>(parts.begin(), parts.size()));
}

// Row `row` of a table, as a column vector.
template <typename Scalar>
Var<Scalar> lookup(const Var<Scalar>& table, Index row) {
  if (row < 0 || row >= table.rows()) {
    throw std::out_of_range("lookup: row " + std::to_string(row) + " outside table of " +
                            std::to_string(table.rows()) + " rows");
  }
  Matrix<Scalar> out = table.value().row(row).transpose();
  return table.graph().record(OpKind::kLookup, {table.id()}, std::move(out), row);
}

// x - logsumexp(x), using max subtraction.
template <typename Scalar>
Var<Scalar> log_softmax(const Var<Scalar>& x) {
  detail::require_vector(x, "log_softmax");
  if (x.rows() < 1) throw ShapeError("log_softmax: empty input");
  if (!x.value().allFinite()) throw NumericError("log_softmax: non-finite input");
  const Scalar m = x.value().maxCoeff();
  const Scalar lse = m + std::log((x.value().array() - m).exp().sum());
  Matrix<Scalar> out = (x.value().array() - lse).matrix();
  return x.graph().record(OpKind::kLogSoftmax, {x.id()}, std::move(out));
}

// -logp[gold] as a 1x1 tensor.
template <typename Scalar>
Var<Scalar> nll_pick(const Var<Scalar>& logp, Index gold) {
  detail::require_vector(logp, "nll_pick");
  if (gold < 0 || gold >= logp.rows()) {
    throw std::out_of_range("nll_pick: class " + std::to_string(gold) + " outside " +
                            std::to_string(logp.rows()) + " classes");
  }
  Matrix<Scalar> out(1, 1);
  out(0, 0) = -logp.value()(gold, 0);
  return logp.graph().record(OpKind::kNllPick, {logp.id()}, std::move(out), gold);
}

template <typename Scalar>
Var<Scalar> squared_norm(const Var<Scalar>& x) {
  Matrix<Scalar> out(1, 1);
  out(0, 0) = x.value().squaredNorm();
  return x.graph().record(OpKind::kSquaredNorm, {x.id()}, std::move(out));
}

template <typename Scalar>
Var<Scalar> operator+(const Var<Scalar>& a, const Var<Scalar>& b) {
  return add(a, b);
}

template <typename Scalar>
Var<Scalar> operator-(const Var<Scalar>& a, const Var<Scalar>& b) {
  return sub(a, b);
}

}  // namespace s2b

#endif  // S2B_AUTODIFF_HPP_
