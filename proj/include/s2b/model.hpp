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

#ifndef S2B_MODEL_HPP_
#define S2B_MODEL_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

#include "s2b/layers.hpp"
#include "s2b/parameters.hpp"
#include "s2b/vocabulary.hpp"

namespace s2b {

// Layer sizes. Bidirectional layers (char_hidden, word_hidden) give the total
// output size, split evenly between the two directions; decoder GRUs are
// unidirectional with decoder_hidden units.
struct Architecture {
  Index word_embedding = 200;
  Index char_embedding = 30;
  Index label_embedding = 150;
  Index char_hidden = 100;
  Index word_hidden = 300;
  Index decoder_hidden = 300;
  // Forward decoder predicts from [->h, h_w] only (no right label context).
  bool fw_only = false;

  void validate() const;
  bool operator==(const Architecture&) const = default;
};

inline void Architecture::validate() const {
  if (word_embedding < 1 || char_embedding < 1 || label_embedding < 1 || char_hidden < 2 ||
      word_hidden < 2 || decoder_hidden < 1) {
    throw std::invalid_argument("architecture: every size must be positive");
  }
  if (char_hidden % 2 != 0 || word_hidden % 2 != 0) {
    throw std::invalid_argument("architecture: bidirectional layer sizes must be even");
  }
}

// The encoder / double-decoder network: vocabulary, sizes and parameters.
// Move-only; layer views point into the owned ParameterSet.
template <typename Scalar>
class Model {
 public:
  Model(Vocabulary vocab, Architecture arch, std::uint64_t seed)
      : vocab_(std::move(vocab)), arch_(arch) {
    arch_.validate();
    if (vocab_.num_labels() == 0) throw std::invalid_argument("model: no labels");
    Rng rng(seed);
    const Index k = static_cast<Index>(vocab_.num_labels());
    const Index char_dir = arch_.char_hidden / 2;
    const Index word_dir = arch_.word_hidden / 2;
    const Index lex_in = arch_.word_embedding + arch_.char_hidden;
    const Index dec_in = arch_.word_hidden + arch_.label_embedding;

    word_embeddings = make_embedding(params_, "embedding.word",
                                     static_cast<Index>(vocab_.word_rows()), arch_.word_embedding, rng);
    char_embeddings = make_embedding(params_, "embedding.char",
                                     static_cast<Index>(vocab_.char_rows()), arch_.char_embedding, rng);
    label_embeddings = make_embedding(params_, "embedding.label",
                                      static_cast<Index>(vocab_.label_rows()), arch_.label_embedding, rng);
    char_fwd = make_gru(params_, "char_gru.fwd", arch_.char_embedding, char_dir, rng);
    char_bwd = make_gru(params_, "char_gru.bwd", arch_.char_embedding, char_dir, rng);
    char_ffnn = make_ffnn(params_, "char_ffnn", arch_.char_hidden, arch_.char_hidden,
                          arch_.char_hidden, rng);
    word_fwd = make_gru(params_, "word_gru.fwd", lex_in, word_dir, rng);
    word_bwd = make_gru(params_, "word_gru.bwd", lex_in, word_dir, rng);
    bw_decoder = make_gru(params_, "decoder.bw", dec_in, arch_.decoder_hidden, rng);
    fw_decoder = make_gru(params_, "decoder.fw", dec_in, arch_.decoder_hidden, rng);
    bw_output = make_affine(params_, "output.bw", arch_.word_hidden + arch_.decoder_hidden, k, rng);
    const Index fw_in = arch_.fw_only ? arch_.decoder_hidden + arch_.word_hidden
                                      : 2 * arch_.decoder_hidden + arch_.word_hidden;
    fw_output = make_affine(params_, "output.fw", fw_in, k, rng);
  }

  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  const Vocabulary& vocab() const { return vocab_; }
  const Architecture& arch() const { return arch_; }
  ParameterSet<Scalar>& params() { return params_; }
  const ParameterSet<Scalar>& params() const { return params_; }
  Index num_labels() const { return static_cast<Index>(vocab_.num_labels()); }

  // Same network with every parameter converted to another scalar type.
  template <typename Other>
  Model<Other> cast() const {
    Model<Other> out(vocab_, arch_, 0);
    auto src = params_.all();
    auto dst = out.params().all();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value.template cast<Other>();
    return out;
  }

  EmbeddingTable<Scalar> word_embeddings;
  EmbeddingTable<Scalar> char_embeddings;
  EmbeddingTable<Scalar> label_embeddings;
  GruParams<Scalar> char_fwd;
  GruParams<Scalar> char_bwd;
  FfnnParams<Scalar> char_ffnn;
  GruParams<Scalar> word_fwd;
  GruParams<Scalar> word_bwd;
  GruParams<Scalar> bw_decoder;
  GruParams<Scalar> fw_decoder;
  AffineParams<Scalar> bw_output;  // over [h_w, <-h]
  AffineParams<Scalar> fw_output;  // over [->h, h_w, <-h], or [->h, h_w] when fw_only

 private:
  Vocabulary vocab_;
  Architecture arch_;
  ParameterSet<Scalar> params_;
};

// Number of trainable scalars for the given sizes, without building a model.
inline Index parameter_count(const Architecture& arch, Index word_rows, Index char_rows,
                             Index num_labels) {
  arch.validate();
  auto gru = [](Index in, Index h) { return 3 * (h * in + h * h + h); };
  auto affine = [](Index in, Index out) { return out * in + out; };
  const Index lex_in = arch.word_embedding + arch.char_hidden;
  const Index dec_in = arch.word_hidden + arch.label_embedding;
  const Index fw_in = arch.fw_only ? arch.decoder_hidden + arch.word_hidden
                                   : 2 * arch.decoder_hidden + arch.word_hidden;
  return word_rows * arch.word_embedding + char_rows * arch.char_embedding +
         (num_labels + 2) * arch.label_embedding +
         2 * gru(arch.char_embedding, arch.char_hidden / 2) +
         affine(arch.char_hidden, arch.char_hidden) * 2 +
         2 * gru(lex_in, arch.word_hidden / 2) + 2 * gru(dec_in, arch.decoder_hidden) +
         affine(arch.word_hidden + arch.decoder_hidden, num_labels) + affine(fw_in, num_labels);
}

}  // namespace s2b

#endif  // S2B_MODEL_HPP_
