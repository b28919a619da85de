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


#include "s2b/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace s2b {

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (!(base_lr >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (segment_length < 1) throw std::invalid_argument("segment length must be >= 1");
  if (segment_shift < 1 || segment_shift > segment_length) {
    throw std::invalid_argument("segment shift must lie in [1, segment length]");
  }
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
}

std::optional<OptimizerKind> parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgdMomentum;
  if (name == "adam") return OptimizerKind::kAdam;
  return std::nullopt;
}

std::optional<Batching> parse_batching(std::string_view name) {
  if (name == "segments") return Batching::kSegments;
  if (name == "clusters") return Batching::kClusters;
  return std::nullopt;
}

std::optional<Regime> parse_regime(std::string_view name) {
  if (name == "single") return Regime::kSingle;
  if (name == "two-opt" || name == "two_opt") return Regime::kTwoOptimizers;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

Graph<Real>& graph_of(std::span<const Var<Real>> vars, const char* what) {
  if (vars.empty()) throw std::invalid_argument(std::string(what) + ": empty sequence");
  return vars.front().graph();
}

Var<Real> zero_scalar(Graph<Real>& g) { return g.constant(Matrix<Real>::Zero(1, 1)); }

Var<Real> sum_or_zero(Graph<Real>& g, const std::vector<Var<Real>>& terms) {
  if (terms.empty()) return zero_scalar(g);
  if (terms.size() == 1) return terms.front();
  return add_n(std::span<const Var<Real>>(terms));
}

}  // namespace

Var<Real> joint_nll(std::span<const Var<Real>> fw_logp, std::span<const Var<Real>> bw_logp,
                    std::span<const int> gold) {
  if (fw_logp.size() != gold.size() || bw_logp.size() != gold.size()) {
    throw std::invalid_argument("joint_nll: sequence lengths differ");
  }
  Graph<Real>& g = graph_of(fw_logp, "joint_nll");
  std::vector<Var<Real>> terms;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == Vocabulary::kNoLabel) continue;
    terms.push_back(nll_pick(fw_logp[i], gold[i]));
    terms.push_back(nll_pick(bw_logp[i], gold[i]));
  }
  return scale(sum_or_zero(g, terms), 0.5);
}

Var<Real> backward_nll(std::span<const Var<Real>> bw_logp, std::span<const int> gold) {
  if (bw_logp.size() != gold.size()) throw std::invalid_argument("backward_nll: sequence lengths differ");
  Graph<Real>& g = graph_of(bw_logp, "backward_nll");
  std::vector<Var<Real>> terms;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] != Vocabulary::kNoLabel) terms.push_back(nll_pick(bw_logp[i], gold[i]));
  }
  return sum_or_zero(g, terms);
}

Var<Real> l2_penalty(Graph<Real>& g, std::span<Parameter<Real>* const> params, Real lambda) {
  if (lambda < 0) throw std::invalid_argument("l2_penalty: lambda must be >= 0");
  std::vector<Var<Real>> terms;
  terms.reserve(params.size());
  for (Parameter<Real>* p : params) terms.push_back(squared_norm(g.param(*p)));
  return scale(sum_or_zero(g, terms), lambda / 2);
}

Var<Real> sequence_loss(std::span<const Var<Real>> fw_logp, std::span<const Var<Real>> bw_logp,
                        std::span<const int> gold, std::span<Parameter<Real>* const> params,
                        Real lambda) {
  Var<Real> data = joint_nll(fw_logp, bw_logp, gold);
  return data + l2_penalty(data.graph(), params, lambda);
}

Var<Real> backward_only_loss(std::span<const Var<Real>> bw_logp, std::span<const int> gold,
                             std::span<Parameter<Real>* const> params, Real lambda) {
  Var<Real> data = backward_nll(bw_logp, gold);
  return data + l2_penalty(data.graph(), params, lambda);
}

// ---------------------------------------------------------------------------

double lr_at_epoch(double base_lr, int epoch, int total_epochs) {
  if (total_epochs <= 0) throw std::invalid_argument("lr_at_epoch: total_epochs must be positive");
  if (epoch < 0 || epoch > total_epochs) throw std::out_of_range("lr_at_epoch: epoch outside schedule");
  return base_lr * (1.0 - static_cast<double>(epoch) / total_epochs);
}

void adam_update(Matrix<Real>& theta, AdamSlots& slots, const Matrix<Real>& grad, Real lr) {
  if (theta.rows() != grad.rows() || theta.cols() != grad.cols()) {
    throw ShapeError("adam_update: shape mismatch");
  }
  if (slots.m.size() == 0) {
    slots.m = Matrix<Real>::Zero(grad.rows(), grad.cols());
    slots.v = Matrix<Real>::Zero(grad.rows(), grad.cols());
  } else if (slots.m.rows() != grad.rows() || slots.m.cols() != grad.cols()) {
    throw ShapeError("adam_update: slot shape mismatch");
  }
  ++slots.step;
  slots.m = kAdamBeta1 * slots.m + (1 - kAdamBeta1) * grad;
  slots.v = kAdamBeta2 * slots.v + (1 - kAdamBeta2) * grad.cwiseAbs2();
  const Real c1 = 1 - std::pow(kAdamBeta1, static_cast<Real>(slots.step));
  const Real c2 = 1 - std::pow(kAdamBeta2, static_cast<Real>(slots.step));
  theta.array() -= lr * (slots.m.array() / c1) / ((slots.v.array() / c2).sqrt() + kAdamEpsilon);
}

void SgdMomentum::step(std::span<Parameter<Real>* const> params, Real lr) {
  for (Parameter<Real>* p : params) {
    auto [it, fresh] = velocity_.try_emplace(p);
    if (fresh) it->second = Matrix<Real>::Zero(p->value.rows(), p->value.cols());
    sgd_momentum_update(p->value, it->second, p->grad, lr, momentum_);
  }
}

void Adam::step(std::span<Parameter<Real>* const> params, Real lr) {
  for (Parameter<Real>* p : params) adam_update(p->value, slots_[p], p->grad, lr);
}

std::unique_ptr<Optimizer> make_optimizer(const TrainConfig& config) {
  if (config.optimizer == OptimizerKind::kAdam) return std::make_unique<Adam>();
  return std::make_unique<SgdMomentum>(config.momentum);
}

// ---------------------------------------------------------------------------

std::vector<Segment> make_segments(std::size_t n, std::size_t length, std::size_t shift) {
  if (length < 1) throw std::invalid_argument("make_segments: length must be >= 1");
  if (shift < 1 || shift > length) {
    throw std::invalid_argument("make_segments: shift must lie in [1, length]");
  }
  std::vector<Segment> out;
  if (n == 0) return out;
  if (n < length) {
    out.push_back({0, n, length});
    return out;
  }
  std::size_t k = 0;
  for (; k + length <= n; k += shift) out.push_back({k, length, length});
  if (out.back().begin + length < n) out.push_back({n - length, length, length});
  return out;
}

EncodedSentence materialize(const EncodedSentence& s, const Segment& seg) {
  if (seg.begin + seg.length > s.size() || seg.padded_length < seg.length) {
    throw std::out_of_range("materialize: segment outside sentence");
  }
  const auto b = static_cast<std::ptrdiff_t>(seg.begin);
  const auto e = static_cast<std::ptrdiff_t>(seg.begin + seg.length);
  EncodedSentence out;
  out.words.assign(s.words.begin() + b, s.words.begin() + e);
  out.chars.assign(s.chars.begin() + b, s.chars.begin() + e);
  if (!s.labels.empty()) out.labels.assign(s.labels.begin() + b, s.labels.begin() + e);
  else out.labels.assign(seg.length, Vocabulary::kNoLabel);
  const std::size_t pad = seg.padded_length - seg.length;
  out.words.insert(out.words.end(), pad, Vocabulary::kPadWord);
  out.chars.insert(out.chars.end(), pad, std::vector<int>{Vocabulary::kPadChar});
  out.labels.insert(out.labels.end(), pad, Vocabulary::kNoLabel);
  return out;
}

std::vector<std::vector<std::size_t>> cluster_batches(std::span<const std::size_t> lengths,
                                                      std::size_t cap) {
  if (cap < 1) throw std::invalid_argument("cluster_batches: cap must be >= 1");
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < lengths.size(); ++i) groups[lengths[i]].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [len, idx] : groups) {
    for (std::size_t k = 0; k < idx.size(); k += cap) {
      const std::size_t end = std::min(idx.size(), k + cap);
      out.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(k),
                       idx.begin() + static_cast<std::ptrdiff_t>(end));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

enum class BatchLoss { kJoint, kBackward };

struct BatchGraph {
  Graph<Real> graph;
  Var<Real> data;  // mean over sequences
};

void build_batch_loss(BatchGraph& bg, const Model<Real>& model,
                      std::span<const EncodedSentence> batch, BatchLoss kind, const Dropout& drop) {
  if (batch.empty()) throw std::invalid_argument("training step: empty batch");
  std::vector<Var<Real>> per_sequence;
  per_sequence.reserve(batch.size());
  for (const EncodedSentence& s : batch) {
    auto out = run_network(bg.graph, model, s, LabelSource::kGold, drop);
    auto bw = log_probs<Real>(std::span<const DecoderState<Real>>(out.backward));
    std::span<const int> gold(s.labels);
    if (kind == BatchLoss::kBackward) {
      per_sequence.push_back(backward_nll(bw, gold));
    } else {
      auto fw = log_probs<Real>(std::span<const DecoderState<Real>>(out.forward));
      per_sequence.push_back(joint_nll(fw, bw, gold));
    }
  }
  Var<Real> total = per_sequence.size() == 1 ? per_sequence.front()
                                             : add_n(std::span<const Var<Real>>(per_sequence));
  bg.data = scale(total, Real(1) / static_cast<Real>(batch.size()));
}

Real apply_step(Graph<Real>& g, Var<Real> loss, std::span<Parameter<Real>* const> params,
                Optimizer& optimizer, Real lr, const TrainConfig& config) {
  const Real value = loss.scalar();
  if (!std::isfinite(value)) throw NumericError("non-finite training loss");
  for (Parameter<Real>* p : params) p->zero_grad();
  g.backward(loss);
  if (config.clip_norm > 0) clip_gradient_norm(params, static_cast<Real>(config.clip_norm));
  optimizer.step(params, lr);
  for (Parameter<Real>* p : params) p->zero_grad();
  return value;
}

Dropout train_dropout(const TrainConfig& config, Rng& rng) {
  return Dropout{config.dropout, Mode::kTrain, &rng};
}

}  // namespace

Real train_step_single(Model<Real>& model, std::span<const EncodedSentence> batch,
                       Optimizer& optimizer, Real lr, const TrainConfig& config, Rng& rng) {
  BatchGraph bg;
  build_batch_loss(bg, model, batch, BatchLoss::kJoint, train_dropout(config, rng));
  auto params = model.params().all();
  Var<Real> loss = bg.data + l2_penalty(bg.graph, params, config.lambda);
  return apply_step(bg.graph, loss, params, optimizer, lr, config);
}

TwoOptimizerLosses train_step_two_opt(Model<Real>& model, std::span<const EncodedSentence> batch,
                                      Optimizer& backward_optimizer, Optimizer& global_optimizer,
                                      Real backward_lr, Real global_lr, const TrainConfig& config,
                                      Rng& rng) {
  TwoOptimizerLosses out;
  {
    BatchGraph bg;
    build_batch_loss(bg, model, batch, BatchLoss::kBackward, train_dropout(config, rng));
    auto reach = bg.graph.reachable_parameters(bg.data);
    Var<Real> loss = bg.data + l2_penalty(bg.graph, reach, config.lambda);
    out.backward = apply_step(bg.graph, loss, reach, backward_optimizer, backward_lr, config);
  }
  {
    BatchGraph bg;
    build_batch_loss(bg, model, batch, BatchLoss::kJoint, train_dropout(config, rng));
    auto params = model.params().all();
    Var<Real> loss = bg.data + l2_penalty(bg.graph, params, config.lambda);
    out.global = apply_step(bg.graph, loss, params, global_optimizer, global_lr, config);
  }
  return out;
}

std::vector<Parameter<Real>*> backward_path_parameters(Model<Real>& model) {
  // Reachability does not depend on the sentence, so a one-token probe suffices.
  EncodedSentence probe;
  probe.words = {Vocabulary::kUnkWord};
  probe.chars = {{Vocabulary::kUnkChar}};
  probe.labels = {0};
  BatchGraph bg;
  build_batch_loss(bg, model, std::span<const EncodedSentence>(&probe, 1), BatchLoss::kBackward,
                   Dropout{});
  auto reach = bg.graph.reachable_parameters(bg.data);
  std::vector<Parameter<Real>*> ordered;
  for (Parameter<Real>* p : model.params().all()) {
    if (std::find(reach.begin(), reach.end(), p) != reach.end()) ordered.push_back(p);
  }
  return ordered;
}

// ---------------------------------------------------------------------------

LabelSequences gold_labels(const Corpus& corpus) {
  LabelSequences out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.sentences) out.push_back(s.labels);
  return out;
}

EvalReport evaluate_model(const Model<Real>& model, const Corpus& corpus) {
  return evaluate(gold_labels(corpus), tag_corpus(model, corpus));
}

Real corpus_loss(const Model<Real>& model, const Corpus& corpus, LossKind kind) {
  if (corpus.size() == 0) throw std::invalid_argument("corpus_loss: empty corpus");
  Real total = 0;
  for (const auto& sentence : corpus.sentences) {
    EncodedSentence enc = model.vocab().encode(sentence);
    Graph<Real> g;
    auto out = run_network(g, model, enc, LabelSource::kGold, Dropout{});
    auto bw = log_probs<Real>(std::span<const DecoderState<Real>>(out.backward));
    std::span<const int> gold(enc.labels);
    if (kind == LossKind::kBackwardOnly) {
      total += backward_nll(bw, gold).scalar();
    } else {
      auto fw = log_probs<Real>(std::span<const DecoderState<Real>>(out.forward));
      total += joint_nll(fw, bw, gold).scalar();
    }
  }
  return total / static_cast<Real>(corpus.size());
}

std::string format_epoch_record(const EpochRecord& r) {
  auto num = [](double v) { return std::isnan(v) ? std::string("nan") : fmt::format("{:.4f}", v); };
  return fmt::format("{}\t{:.6g}\t{:.6f}\t{}\t{}\t{}", r.epoch, r.lr, r.train_loss,
                     num(r.dev_accuracy), num(r.dev_f1), num(r.dev_cer));
}

namespace {

std::vector<std::vector<EncodedSentence>> epoch_batches(const std::vector<EncodedSentence>& train,
                                                        const TrainConfig& config, Rng& rng) {
  std::vector<std::vector<EncodedSentence>> batches;
  if (config.batching == Batching::kClusters) {
    std::vector<std::size_t> lengths;
    lengths.reserve(train.size());
    for (const auto& s : train) lengths.push_back(s.size());
    auto groups = cluster_batches(lengths, config.batch_size);
    std::shuffle(groups.begin(), groups.end(), rng);
    for (const auto& group : groups) {
      auto& b = batches.emplace_back();
      for (std::size_t i : group) b.push_back(train[i]);
    }
    return batches;
  }
  std::vector<EncodedSentence> segments;
  for (const auto& s : train) {
    for (const Segment& seg : make_segments(s.size(), config.segment_length, config.segment_shift)) {
      segments.push_back(materialize(s, seg));
    }
  }
  std::shuffle(segments.begin(), segments.end(), rng);
  for (std::size_t k = 0; k < segments.size(); k += config.batch_size) {
    const std::size_t end = std::min(segments.size(), k + config.batch_size);
    batches.emplace_back(std::make_move_iterator(segments.begin() + static_cast<std::ptrdiff_t>(k)),
                         std::make_move_iterator(segments.begin() + static_cast<std::ptrdiff_t>(end)));
  }
  return batches;
}

}  // namespace

FitResult fit(const Architecture& arch, const TrainConfig& config, const Corpus& train,
              const Corpus& dev, const EpochCallback& on_epoch) {
  config.validate();
  if (train.size() == 0) throw std::invalid_argument("fit: empty training corpus");
  Vocabulary vocab = Vocabulary::build(train, config.min_count);
  Model<Real> model(std::move(vocab), arch, config.seed);

  std::vector<EncodedSentence> encoded;
  encoded.reserve(train.size());
  for (const auto& s : train.sentences) {
    if (!s.tokens.empty()) encoded.push_back(model.vocab().encode(s));
  }

  FitResult result{std::move(model), {}, 0, 0.0};
  Model<Real>& m = result.model;
  if (config.epochs == 0) return result;

  Rng rng(config.seed ^ 0x5eed5eedULL);
  auto optimizer = make_optimizer(config);
  auto backward_optimizer = make_optimizer(config);
  const bool decay = config.optimizer == OptimizerKind::kSgdMomentum;
  std::vector<Matrix<Real>> best;
  bool have_best = false;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Real lr = decay ? lr_at_epoch(config.base_lr, epoch, config.epochs) : config.base_lr;
    auto batches = epoch_batches(encoded, config, rng);
    Real loss_sum = 0;
    for (const auto& batch : batches) {
      std::span<const EncodedSentence> view(batch);
      if (config.regime == Regime::kTwoOptimizers) {
        loss_sum += train_step_two_opt(m, view, *backward_optimizer, *optimizer, lr, lr, config, rng).global;
      } else {
        loss_sum += train_step_single(m, view, *optimizer, lr, config, rng);
      }
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.lr = lr;
    rec.train_loss = batches.empty() ? 0.0 : loss_sum / static_cast<Real>(batches.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (dev.size() > 0) {
      EvalReport report = evaluate_model(m, dev);
      rec.dev_accuracy = report.accuracy;
      rec.dev_f1 = report.f1;
      rec.dev_cer = report.cer.value_or(nan);
    } else {
      rec.dev_accuracy = rec.dev_f1 = rec.dev_cer = nan;
    }
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);

    // Without a dev set the last epoch wins.
    const bool better = dev.size() == 0 || !have_best || rec.dev_accuracy > result.best_dev_accuracy;
    if (better) {
      best = m.params().snapshot();
      have_best = true;
      result.best_epoch = rec.epoch;
      result.best_dev_accuracy = rec.dev_accuracy;
    }
  }
  m.params().restore(best);
  return result;
}

}  // namespace s2b
