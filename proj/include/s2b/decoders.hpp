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

// Backward and forward label decoders and greedy tagging.
//
// The backward decoder scans positions N..1, is seeded with <EOS> and, at
// position i, consumes the label of position i+1. The forward decoder scans
// 1..N from the begin symbol, consumes the label of position i-1, and predicts
// from its own state, the lexical state and the backward decoder's state at
// the same position.

#ifndef S2B_DECODERS_HPP_
#define S2B_DECODERS_HPP_

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "s2b/encoder.hpp"
#include "s2b/layers.hpp"
#include "s2b/model.hpp"

namespace s2b {

enum class LabelSource {
  kGold,       // teacher forcing
  kPredicted,  // feed back the decoder's own argmax
};

template <typename Scalar>
struct DecoderState {
  Var<Scalar> hidden;     // recurrent state
  Var<Scalar> output;     // state after dropout, read by the output layers
  Var<Scalar> logits;
  Var<Scalar> log_probs;
  int label = 0;          // argmax of log_probs
};

// Index of the largest entry; ties go to the lowest index.
template <typename Derived>
int argmax(const Eigen::MatrixBase<Derived>& v) {
  int best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = static_cast<int>(i);
  }
  return best;
}

namespace detail {

inline int fed_label(int gold, int fallback) {
  return gold == Vocabulary::kNoLabel ? fallback : gold;
}

template <typename Scalar>
void require_gold(std::span<const int> gold, std::size_t n, LabelSource source) {
  if (source == LabelSource::kGold && gold.size() != n) {
    throw std::invalid_argument("gold-label decoding needs one gold label per position");
  }
}

}  // namespace detail

template <typename Scalar>
DecoderState<Scalar> backward_decoder_step(Graph<Scalar>& g, const Model<Scalar>& model,
                                           const Var<Scalar>& h_w, int prev_label,
                                           const Var<Scalar>& prev_hidden, const Dropout& drop) {
  DecoderState<Scalar> s;
  Var<Scalar> label = embedding_lookup(g, model.label_embeddings, prev_label);
  s.hidden = gru_step(g, model.bw_decoder, concat({h_w, label}), prev_hidden);
  s.output = dropout(s.hidden, drop);
  s.logits = affine(g, model.bw_output, concat({h_w, s.output}));
  s.log_probs = log_softmax(s.logits);
  s.label = argmax(s.log_probs.value().col(0));
  return s;
}

// Returns one state per position, indexed by position.
template <typename Scalar>
std::vector<DecoderState<Scalar>> run_backward_decoder(Graph<Scalar>& g, const Model<Scalar>& model,
                                                       std::span<const Var<Scalar>> lex,
                                                       LabelSource source, std::span<const int> gold,
                                                       const Dropout& drop) {
  if (lex.empty()) throw std::invalid_argument("run_backward_decoder: empty sentence");
  detail::require_gold<Scalar>(gold, lex.size(), source);
  const int eos = model.vocab().eos_label();
  std::vector<DecoderState<Scalar>> states(lex.size());
  Var<Scalar> hidden = zeros(g, model.arch().decoder_hidden);
  int prev = eos;
  for (std::size_t i = lex.size(); i-- > 0;) {
    states[i] = backward_decoder_step(g, model, lex[i], prev, hidden, drop);
    hidden = states[i].hidden;
    prev = source == LabelSource::kGold ? detail::fed_label(gold[i], eos) : states[i].label;
  }
  return states;
}

// `backward_output` may be null only for fw-only models.
template <typename Scalar>
DecoderState<Scalar> forward_decoder_step(Graph<Scalar>& g, const Model<Scalar>& model,
                                          const Var<Scalar>& h_w, const Var<Scalar>* backward_output,
                                          int prev_label, const Var<Scalar>& prev_hidden,
                                          const Dropout& drop) {
  const bool fw_only = model.arch().fw_only;
  if (!fw_only && backward_output == nullptr) {
    throw std::invalid_argument("forward decoder needs the backward decoder states");
  }
  DecoderState<Scalar> s;
  Var<Scalar> label = embedding_lookup(g, model.label_embeddings, prev_label);
  s.hidden = gru_step(g, model.fw_decoder, concat({h_w, label}), prev_hidden);
  s.output = dropout(s.hidden, drop);
  Var<Scalar> features = fw_only ? concat({s.output, h_w}) : concat({s.output, h_w, *backward_output});
  s.logits = affine(g, model.fw_output, features);
  s.log_probs = log_softmax(s.logits);
  s.label = argmax(s.log_probs.value().col(0));
  return s;
}

// `backward` must hold one state per position unless the model is fw-only,
// in which case it is ignored and may be empty.
template <typename Scalar>
std::vector<DecoderState<Scalar>> run_forward_decoder(Graph<Scalar>& g, const Model<Scalar>& model,
                                                      std::span<const Var<Scalar>> lex,
                                                      std::span<const DecoderState<Scalar>> backward,
                                                      LabelSource source, std::span<const int> gold,
                                                      const Dropout& drop) {
  if (lex.empty()) throw std::invalid_argument("run_forward_decoder: empty sentence");
  const bool fw_only = model.arch().fw_only;
  if (!fw_only && backward.size() != lex.size()) {
    throw std::invalid_argument("run_forward_decoder: backward states do not match the sentence");
  }
  detail::require_gold<Scalar>(gold, lex.size(), source);
  const int eos = model.vocab().eos_label();
  std::vector<DecoderState<Scalar>> states(lex.size());
  Var<Scalar> hidden = zeros(g, model.arch().decoder_hidden);
  int prev = model.vocab().begin_label();
  for (std::size_t i = 0; i < lex.size(); ++i) {
    const Var<Scalar>* bw = fw_only ? nullptr : &backward[i].output;
    states[i] = forward_decoder_step(g, model, lex[i], bw, prev, hidden, drop);
    hidden = states[i].hidden;
    prev = source == LabelSource::kGold ? detail::fed_label(gold[i], eos) : states[i].label;
  }
  return states;
}

template <typename Scalar>
struct NetworkOutputs {
  std::vector<Var<Scalar>> lexical;
  std::vector<DecoderState<Scalar>> backward;
  std::vector<DecoderState<Scalar>> forward;
};

// Encoder plus both decoders. The backward decoder always runs, so its loss
// term is available even for fw-only models.
template <typename Scalar>
NetworkOutputs<Scalar> run_network(Graph<Scalar>& g, const Model<Scalar>& model,
                                   const EncodedSentence& sentence, LabelSource source,
                                   const Dropout& drop) {
  NetworkOutputs<Scalar> out;
  std::span<const int> gold(sentence.labels);
  out.lexical = encode_lexical(g, model, sentence, drop);
  std::span<const Var<Scalar>> lex(out.lexical);
  out.backward = run_backward_decoder(g, model, lex, source, gold, drop);
  out.forward = run_forward_decoder(g, model, lex,
                                    std::span<const DecoderState<Scalar>>(out.backward), source,
                                    gold, drop);
  return out;
}

// Greedy tagging in eval mode with predicted label feedback. Returns the
// forward decoder's label ids.
template <typename Scalar>
std::vector<int> tag_encoded(const Model<Scalar>& model, const EncodedSentence& sentence) {
  if (sentence.size() == 0) return {};
  Graph<Scalar> g;
  const Dropout eval;
  auto lex = encode_lexical(g, model, sentence, eval);
  std::span<const Var<Scalar>> lex_span(lex);
  std::vector<DecoderState<Scalar>> backward;
  if (!model.arch().fw_only) {
    backward = run_backward_decoder(g, model, lex_span, LabelSource::kPredicted, {}, eval);
  }
  auto forward = run_forward_decoder(g, model, lex_span,
                                     std::span<const DecoderState<Scalar>>(backward),
                                     LabelSource::kPredicted, {}, eval);
  std::vector<int> labels;
  labels.reserve(forward.size());
  for (const auto& s : forward) labels.push_back(s.label);
  return labels;
}

template <typename Scalar>
std::vector<std::string> tag_sentence(const Model<Scalar>& model,
                                      std::span<const std::string> tokens) {
  if (tokens.empty()) return {};
  std::vector<std::string> out;
  for (int id : tag_encoded(model, model.vocab().encode(tokens))) {
    out.push_back(model.vocab().label_name(id));
  }
  return out;
}

}  // namespace s2b

#endif  // S2B_DECODERS_HPP_
