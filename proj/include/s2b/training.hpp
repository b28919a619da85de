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

// Losses, optimizers, the learning-rate schedule, batching and the training
// loops (single optimizer and two optimizers). Training runs in double
// precision.

#ifndef S2B_TRAINING_HPP_
#define S2B_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "s2b/autodiff.hpp"
#include "s2b/corpus.hpp"
#include "s2b/decoders.hpp"
#include "s2b/metrics.hpp"
#include "s2b/model.hpp"

namespace s2b {

using Real = double;

// ---------------------------------------------------------------------------
// Configuration

enum class OptimizerKind { kSgdMomentum, kAdam };
enum class Batching { kSegments, kClusters };
enum class Regime { kSingle, kTwoOptimizers };

struct TrainConfig {
  int epochs = 40;
  double base_lr = 0.125;
  double momentum = 0.9;
  OptimizerKind optimizer = OptimizerKind::kSgdMomentum;
  double lambda = 1e-4;
  double dropout = 0.5;
  std::size_t segment_length = 10;
  std::size_t segment_shift = 1;
  std::size_t batch_size = 100;
  Batching batching = Batching::kSegments;
  Regime regime = Regime::kSingle;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;  // global gradient norm; <= 0 disables clipping
  int min_count = 1;

  void validate() const;
};

std::optional<OptimizerKind> parse_optimizer(std::string_view name);
std::optional<Batching> parse_batching(std::string_view name);
std::optional<Regime> parse_regime(std::string_view name);

// ---------------------------------------------------------------------------
// Losses. Positions whose gold label is Vocabulary::kNoLabel are skipped.

// -sum_i 1/2 (logp_fw[e_i] + logp_bw[e_i])
Var<Real> joint_nll(std::span<const Var<Real>> fw_logp, std::span<const Var<Real>> bw_logp,
                    std::span<const int> gold);
// -sum_i logp_bw[e_i]
Var<Real> backward_nll(std::span<const Var<Real>> bw_logp, std::span<const int> gold);
// lambda / 2 * sum ||theta||^2
Var<Real> l2_penalty(Graph<Real>& g, std::span<Parameter<Real>* const> params, Real lambda);

Var<Real> sequence_loss(std::span<const Var<Real>> fw_logp, std::span<const Var<Real>> bw_logp,
                        std::span<const int> gold, std::span<Parameter<Real>* const> params,
                        Real lambda);
Var<Real> backward_only_loss(std::span<const Var<Real>> bw_logp, std::span<const int> gold,
                             std::span<Parameter<Real>* const> params, Real lambda);

template <typename Scalar>
std::vector<Var<Scalar>> log_probs(std::span<const DecoderState<Scalar>> states) {
  std::vector<Var<Scalar>> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.log_probs);
  return out;
}

// ---------------------------------------------------------------------------
// Schedule and optimizer updates

// base_lr * (1 - epoch / total_epochs)
double lr_at_epoch(double base_lr, int epoch, int total_epochs);

// v <- mu v - lr g; theta <- theta + v
template <typename Scalar>
void sgd_momentum_update(Matrix<Scalar>& theta, Matrix<Scalar>& velocity,
                         const Matrix<Scalar>& grad, Scalar lr, Scalar momentum) {
  if (theta.rows() != grad.rows() || theta.cols() != grad.cols() ||
      velocity.rows() != grad.rows() || velocity.cols() != grad.cols()) {
    throw ShapeError("sgd_momentum_update: shape mismatch");
  }
  velocity = momentum * velocity - lr * grad;
  theta += velocity;
}

struct AdamSlots {
  Matrix<Real> m;
  Matrix<Real> v;
  long step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// Bias-corrected Adam update.
void adam_update(Matrix<Real>& theta, AdamSlots& slots, const Matrix<Real>& grad, Real lr);

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  // Applies one update to `params` from their current gradients.
  virtual void step(std::span<Parameter<Real>* const> params, Real lr) = 0;
};

class SgdMomentum final : public Optimizer {
 public:
  explicit SgdMomentum(Real momentum = 0.9) : momentum_(momentum) {}
  void step(std::span<Parameter<Real>* const> params, Real lr) override;

 private:
  Real momentum_;
  std::unordered_map<const Parameter<Real>*, Matrix<Real>> velocity_;
};

class Adam final : public Optimizer {
 public:
  void step(std::span<Parameter<Real>* const> params, Real lr) override;

 private:
  std::unordered_map<const Parameter<Real>*, AdamSlots> slots_;
};

std::unique_ptr<Optimizer> make_optimizer(const TrainConfig& config);

// ---------------------------------------------------------------------------
// Batching

// Tokens [begin, begin + length) of one sentence, padded to padded_length.
struct Segment {
  std::size_t begin = 0;
  std::size_t length = 0;
  std::size_t padded_length = 0;

  bool operator==(const Segment&) const = default;
};

// Windows of `length` tokens starting every `shift` tokens; the last window
// always ends at the sentence end so every token is covered. A sentence
// shorter than `length` yields one window padded to `length`. Requires
// 1 <= shift <= length so that no token is skipped.
std::vector<Segment> make_segments(std::size_t sentence_length, std::size_t length,
                                   std::size_t shift = 1);

// Slices a sentence; padding uses the <s> word, a padding character and no label.
EncodedSentence materialize(const EncodedSentence& sentence, const Segment& segment);

// Groups sentence indices by exact length (ascending) and splits each group,
// in index order, into batches of at most `cap`.
std::vector<std::vector<std::size_t>> cluster_batches(std::span<const std::size_t> lengths,
                                                      std::size_t cap);

// ---------------------------------------------------------------------------
// Training steps

// Gold-mode pass over the batch, joint loss averaged over sequences plus the L2
// term, one optimizer step over every parameter. Returns the loss.
Real train_step_single(Model<Real>& model, std::span<const EncodedSentence> batch,
                       Optimizer& optimizer, Real lr, const TrainConfig& config, Rng& rng);

struct TwoOptimizerLosses {
  Real backward = 0.0;
  Real global = 0.0;
};

// First a step of `backward_optimizer` on the backward-decoder loss, over the
// parameters that loss reaches; then a fresh pass and a step of
// `global_optimizer` on the full loss over every parameter.
TwoOptimizerLosses train_step_two_opt(Model<Real>& model, std::span<const EncodedSentence> batch,
                                      Optimizer& backward_optimizer, Optimizer& global_optimizer,
                                      Real backward_lr, Real global_lr, const TrainConfig& config,
                                      Rng& rng);

// Parameters reached by the backward-decoder loss (model order).
std::vector<Parameter<Real>*> backward_path_parameters(Model<Real>& model);

// ---------------------------------------------------------------------------
// Evaluation helpers and the epoch loop

template <typename Scalar>
LabelSequences tag_corpus(const Model<Scalar>& model, const Corpus& corpus) {
  LabelSequences out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.sentences) {
    out.push_back(tag_sentence(model, std::span<const std::string>(s.tokens)));
  }
  return out;
}

LabelSequences gold_labels(const Corpus& corpus);

// Tags the corpus and scores it against its gold labels.
EvalReport evaluate_model(const Model<Real>& model, const Corpus& corpus);

enum class LossKind { kJoint, kBackwardOnly };

// Mean per-sentence data term (no L2) in gold mode with dropout off.
Real corpus_loss(const Model<Real>& model, const Corpus& corpus, LossKind kind = LossKind::kJoint);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double lr = 0.0;
  double train_loss = 0.0;
  double dev_accuracy = 0.0;
  double dev_f1 = 0.0;
  double dev_cer = 0.0;  // NaN when the dev set has no concepts
};

// epoch, lr, train_loss, dev_acc, dev_f1, dev_cer separated by tabs.
std::string format_epoch_record(const EpochRecord& r);

struct FitResult {
  Model<Real> model;        // best-dev snapshot
  std::vector<EpochRecord> log;
  int best_epoch = 0;       // 0 when no epoch ran
  double best_dev_accuracy = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

FitResult fit(const Architecture& arch, const TrainConfig& config, const Corpus& train,
              const Corpus& dev, const EpochCallback& on_epoch = {});

}  // namespace s2b

#endif  // S2B_TRAINING_HPP_
