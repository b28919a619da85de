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

// Neural building blocks on top of the autodiff graph: embeddings, affine
// maps, GRU cells and runners, the one-hidden-layer feed-forward block and
// inverted dropout.

#ifndef S2B_LAYERS_HPP_
#define S2B_LAYERS_HPP_

#include <cmath>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2b/autodiff.hpp"
#include "s2b/parameters.hpp"

namespace s2b {

using Rng = std::mt19937_64;

template <typename Scalar>
struct EmbeddingTable {
  Parameter<Scalar>* table = nullptr;

  Index rows() const { return table->value.rows(); }
  Index dim() const { return table->value.cols(); }
};

template <typename Scalar>
struct AffineParams {
  Parameter<Scalar>* weight = nullptr;  // out x in
  Parameter<Scalar>* bias = nullptr;    // out x 1

  Index input_dim() const { return weight->value.cols(); }
  Index output_dim() const { return weight->value.rows(); }
};

// Update gate z, reset gate r and candidate h, each with input weights W
// (hidden x input), recurrent weights U (hidden x hidden) and a bias.
template <typename Scalar>
struct GruParams {
  Parameter<Scalar>* w_z = nullptr;
  Parameter<Scalar>* u_z = nullptr;
  Parameter<Scalar>* b_z = nullptr;
  Parameter<Scalar>* w_r = nullptr;
  Parameter<Scalar>* u_r = nullptr;
  Parameter<Scalar>* b_r = nullptr;
  Parameter<Scalar>* w_h = nullptr;
  Parameter<Scalar>* u_h = nullptr;
  Parameter<Scalar>* b_h = nullptr;

  Index input_dim() const { return w_z->value.cols(); }
  Index hidden_dim() const { return w_z->value.rows(); }
};

// out = W2 tanh(W1 x + b1) + b2
template <typename Scalar>
struct FfnnParams {
  AffineParams<Scalar> hidden;
  AffineParams<Scalar> output;
};

// ---------------------------------------------------------------------------
// Construction and initialization

template <typename Scalar>
EmbeddingTable<Scalar> make_embedding(ParameterSet<Scalar>& params, const std::string& name,
                                      Index rows, Index dim, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix<Scalar> m(rows, dim);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(dist(rng));
  return {params.add(name, std::move(m))};
}

// Weights ~ N(0, 2 / fan_in), zero bias.
template <typename Scalar>
AffineParams<Scalar> make_affine(ParameterSet<Scalar>& params, const std::string& prefix,
                                 Index input_dim, Index output_dim, Rng& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(input_dim)));
  Matrix<Scalar> w(output_dim, input_dim);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<Scalar>(dist(rng));
  AffineParams<Scalar> a;
  a.weight = params.add(prefix + ".W", std::move(w));
  a.bias = params.add(prefix + ".b", Matrix<Scalar>::Zero(output_dim, 1));
  return a;
}

// Weights ~ U(-1/sqrt(hidden), 1/sqrt(hidden)), zero biases.
template <typename Scalar>
GruParams<Scalar> make_gru(ParameterSet<Scalar>& params, const std::string& prefix,
                           Index input_dim, Index hidden_dim, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto uniform = [&](Index rows, Index cols) {
    Matrix<Scalar> m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(dist(rng));
    return m;
  };
  GruParams<Scalar> p;
  p.w_z = params.add(prefix + ".Wz", uniform(hidden_dim, input_dim));
  p.u_z = params.add(prefix + ".Uz", uniform(hidden_dim, hidden_dim));
  p.b_z = params.add(prefix + ".bz", Matrix<Scalar>::Zero(hidden_dim, 1));
  p.w_r = params.add(prefix + ".Wr", uniform(hidden_dim, input_dim));
  p.u_r = params.add(prefix + ".Ur", uniform(hidden_dim, hidden_dim));
  p.b_r = params.add(prefix + ".br", Matrix<Scalar>::Zero(hidden_dim, 1));
  p.w_h = params.add(prefix + ".Wh", uniform(hidden_dim, input_dim));
  p.u_h = params.add(prefix + ".Uh", uniform(hidden_dim, hidden_dim));
  p.b_h = params.add(prefix + ".bh", Matrix<Scalar>::Zero(hidden_dim, 1));
  return p;
}

template <typename Scalar>
FfnnParams<Scalar> make_ffnn(ParameterSet<Scalar>& params, const std::string& prefix,
                             Index input_dim, Index hidden_dim, Index output_dim, Rng& rng) {
  FfnnParams<Scalar> f;
  f.hidden = make_affine(params, prefix + ".hidden", input_dim, hidden_dim, rng);
  f.output = make_affine(params, prefix + ".output", hidden_dim, output_dim, rng);
  return f;
}

// ---------------------------------------------------------------------------
// Forward computations

template <typename Scalar>
Var<Scalar> zeros(Graph<Scalar>& g, Index n) {
  return g.constant(Matrix<Scalar>::Zero(n, 1));
}

template <typename Scalar>
Var<Scalar> embedding_lookup(Graph<Scalar>& g, const EmbeddingTable<Scalar>& table, Index id) {
  return lookup(g.param(*table.table), id);
}

template <typename Scalar>
Var<Scalar> affine(const Var<Scalar>& w, const Var<Scalar>& b, const Var<Scalar>& x) {
  return add(matvec(w, x), b);
}

template <typename Scalar>
Var<Scalar> affine(Graph<Scalar>& g, const AffineParams<Scalar>& p, const Var<Scalar>& x) {
  return affine(g.param(*p.weight), g.param(*p.bias), x);
}

template <typename Scalar>
Var<Scalar> gru_step(Graph<Scalar>& g, const GruParams<Scalar>& p, const Var<Scalar>& x,
                     const Var<Scalar>& h_prev) {
  if (x.rows() != p.input_dim() || h_prev.rows() != p.hidden_dim()) {
    throw ShapeError("gru_step: expected input " + std::to_string(p.input_dim()) + " and state " +
                     std::to_string(p.hidden_dim()) + ", got " + std::to_string(x.rows()) +
                     " and " + std::to_string(h_prev.rows()));
  }
  auto gate = [&](Parameter<Scalar>* w, Parameter<Scalar>* u, Parameter<Scalar>* b,
                  const Var<Scalar>& h) {
    return matvec(g.param(*w), x) + matvec(g.param(*u), h) + g.param(*b);
  };
  Var<Scalar> z = sigmoid(gate(p.w_z, p.u_z, p.b_z, h_prev));
  Var<Scalar> r = sigmoid(gate(p.w_r, p.u_r, p.b_r, h_prev));
  Var<Scalar> candidate = tanh(gate(p.w_h, p.u_h, p.b_h, hadamard(r, h_prev)));
  // (1 - z) * h_prev + z * candidate
  return h_prev + hadamard(z, candidate - h_prev);
}

enum class Direction { kForward, kBackward };

// Output i is the state after consuming position i: positions 0..i when
// running forward, positions N-1..i when running backward.
template <typename Scalar>
std::vector<Var<Scalar>> run_gru(Graph<Scalar>& g, const GruParams<Scalar>& p,
                                 std::span<const Var<Scalar>> seq, const Var<Scalar>& h0,
                                 Direction direction) {
  if (seq.empty()) throw std::invalid_argument("run_gru: empty sequence");
  std::vector<Var<Scalar>> out(seq.size());
  Var<Scalar> h = h0;
  if (direction == Direction::kForward) {
    for (std::size_t i = 0; i < seq.size(); ++i) out[i] = h = gru_step(g, p, seq[i], h);
  } else {
    for (std::size_t i = seq.size(); i-- > 0;) out[i] = h = gru_step(g, p, seq[i], h);
  }
  return out;
}

// Position i holds [forward state i, backward state i]; both directions start
// from zero.
template <typename Scalar>
std::vector<Var<Scalar>> bi_gru(Graph<Scalar>& g, const GruParams<Scalar>& fwd,
                                const GruParams<Scalar>& bwd, std::span<const Var<Scalar>> seq) {
  if (fwd.hidden_dim() != bwd.hidden_dim()) {
    throw ShapeError("bi_gru: directions disagree on hidden size");
  }
  auto f = run_gru(g, fwd, seq, zeros(g, fwd.hidden_dim()), Direction::kForward);
  auto b = run_gru(g, bwd, seq, zeros(g, bwd.hidden_dim()), Direction::kBackward);
  std::vector<Var<Scalar>> out;
  out.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) out.push_back(concat({f[i], b[i]}));
  return out;
}

template <typename Scalar>
Var<Scalar> ffnn(Graph<Scalar>& g, const FfnnParams<Scalar>& p, const Var<Scalar>& x) {
  return affine(g, p.output, tanh(affine(g, p.hidden, x)));
}

enum class Mode { kTrain, kEval };

struct Dropout {
  double rate = 0.0;
  Mode mode = Mode::kEval;
  Rng* rng = nullptr;  // required in train mode when rate > 0

  bool active() const { return mode == Mode::kTrain && rate > 0.0; }
};

// Inverted dropout: in train mode each coordinate is zeroed with probability
// `rate` and survivors are scaled by 1 / (1 - rate). Eval mode is the identity.
template <typename Scalar>
Var<Scalar> dropout(const Var<Scalar>& x, const Dropout& d) {
  if (d.rate < 0.0 || d.rate >= 1.0) throw std::invalid_argument("dropout: rate must lie in [0, 1)");
  if (!d.active()) return x;
  if (d.rng == nullptr) throw std::invalid_argument("dropout: train mode needs a random generator");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Scalar keep = static_cast<Scalar>(1.0 / (1.0 - d.rate));
  Matrix<Scalar> mask(x.rows(), x.cols());
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = u(*d.rng) < d.rate ? Scalar(0) : keep;
  return hadamard(x, x.graph().constant(std::move(mask)));
}

}  // namespace s2b

#endif  // S2B_LAYERS_HPP_
