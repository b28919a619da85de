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

// Character-level word representations and contextual lexical states.

#ifndef S2B_ENCODER_HPP_
#define S2B_ENCODER_HPP_

#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "s2b/layers.hpp"
#include "s2b/model.hpp"
#include "s2b/vocabulary.hpp"

namespace s2b {

// h_c(w) = FFNN(sum_j biGRU_c(E_c(c_1..n))_j)
template <typename Scalar>
Var<Scalar> encode_characters(Graph<Scalar>& g, const Model<Scalar>& model,
                              std::span<const int> chars) {
  if (chars.empty()) throw std::invalid_argument("encode_characters: word without characters");
  std::vector<Var<Scalar>> embedded;
  embedded.reserve(chars.size());
  for (int c : chars) embedded.push_back(embedding_lookup(g, model.char_embeddings, c));
  auto states = bi_gru(g, model.char_fwd, model.char_bwd,
                       std::span<const Var<Scalar>>(embedded));
  Var<Scalar> summed = states.size() == 1
                           ? states.front()
                           : add_n(std::span<const Var<Scalar>>(states));
  return ffnn(g, model.char_ffnn, summed);
}

// h_w = biGRU_w([E_w(w_i), h_c(w_i)]), with dropout on the concatenated
// inputs and on the layer outputs. Words with identical spellings share one
// character encoding within the sentence.
template <typename Scalar>
std::vector<Var<Scalar>> encode_lexical(Graph<Scalar>& g, const Model<Scalar>& model,
                                        const EncodedSentence& sentence, const Dropout& drop) {
  if (sentence.size() == 0) throw std::invalid_argument("encode_lexical: empty sentence");
  std::map<std::vector<int>, Var<Scalar>> char_cache;
  std::vector<Var<Scalar>> inputs;
  inputs.reserve(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    auto it = char_cache.find(sentence.chars[i]);
    if (it == char_cache.end()) {
      it = char_cache.emplace(sentence.chars[i],
                              encode_characters(g, model, std::span<const int>(sentence.chars[i])))
               .first;
    }
    Var<Scalar> word = embedding_lookup(g, model.word_embeddings, sentence.words[i]);
    inputs.push_back(dropout(concat({word, it->second}), drop));
  }
  auto states = bi_gru(g, model.word_fwd, model.word_bwd, std::span<const Var<Scalar>>(inputs));
  for (auto& h : states) h = dropout(h, drop);
  return states;
}

}  // namespace s2b

#endif  // S2B_ENCODER_HPP_
