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

#include "s2b/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

namespace s2b {

namespace {

struct TagParts {
  std::string tag;
  std::string type;
};

// Splits at the first dash, as the CoNLL script does.
TagParts split_tag(std::string_view label) {
  const std::string normalized = normalize_bio(label);
  const auto dash = normalized.find('-');
  if (dash == std::string::npos) return {normalized, ""};
  return {normalized.substr(0, dash), normalized.substr(dash + 1)};
}

bool end_of_chunk(const TagParts& prev, const TagParts& cur) {
  const std::string& p = prev.tag;
  const std::string& t = cur.tag;
  if (p == "B" && (t == "B" || t == "O")) return true;
  if (p == "I" && (t == "B" || t == "O")) return true;
  if (p == "E" && (t == "E" || t == "I" || t == "O")) return true;
  if (p != "O" && p != "." && prev.type != cur.type) return true;
  return p == "]" || p == "[";
}

bool start_of_chunk(const TagParts& prev, const TagParts& cur) {
  const std::string& p = prev.tag;
  const std::string& t = cur.tag;
  if (t == "B" && (p == "B" || p == "I" || p == "O")) return true;
  if (p == "O" && (t == "I" || t == "E")) return true;
  if (p == "E" && (t == "E" || t == "I")) return true;
  if (t != "O" && t != "." && prev.type != cur.type) return true;
  return t == "[" || t == "]";
}

void require_aligned(const LabelSequences& gold, const LabelSequences& pred) {
  if (gold.size() != pred.size()) {
    throw std::invalid_argument("gold and predicted corpora have different sentence counts");
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw std::invalid_argument("sentence " + std::to_string(i) +
                                  ": gold and predicted lengths differ");
    }
  }
}

}  // namespace

std::string normalize_bio(std::string_view label) {
  if (label.size() > 2 && (label.starts_with("B-") || label.starts_with("I-"))) {
    return std::string(label);
  }
  if (label.size() > 2 && (label.ends_with("-B") || label.ends_with("-I"))) {
    return std::string(1, label.back()) + "-" + std::string(label.substr(0, label.size() - 2));
  }
  return std::string(label);
}

std::vector<Chunk> extract_chunks(std::span<const std::string> labels) {
  std::vector<Chunk> chunks;
  TagParts prev{"O", ""};
  bool open = false;
  Chunk current;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    TagParts cur = split_tag(labels[i]);
    const bool start = start_of_chunk(prev, cur);
    if (open && (end_of_chunk(prev, cur) || start)) {
      current.end = i - 1;
      chunks.push_back(current);
      open = false;
    }
    if (start) {
      current = Chunk{cur.type, i, i};
      open = true;
    }
    prev = std::move(cur);
  }
  if (open) {
    current.end = labels.size() - 1;
    chunks.push_back(current);
  }
  return chunks;
}

std::vector<std::string> concept_sequence(std::span<const std::string> labels) {
  std::vector<std::string> out;
  for (auto& c : extract_chunks(labels)) out.push_back(std::move(c.type));
  return out;
}

double token_accuracy(const LabelSequences& gold, const LabelSequences& pred) {
  require_aligned(gold, pred);
  std::size_t total = 0;
  std::size_t match = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t i = 0; i < gold[s].size(); ++i) match += gold[s][i] == pred[s][i] ? 1 : 0;
    total += gold[s].size();
  }
  if (total == 0) throw std::invalid_argument("token_accuracy: no tokens");
  return 100.0 * static_cast<double>(match) / static_cast<double>(total);
}

ChunkCounts count_chunks(std::span<const Chunk> gold, std::span<const Chunk> pred) {
  std::set<Chunk> gold_set(gold.begin(), gold.end());
  ChunkCounts c;
  c.gold = gold.size();
  c.predicted = pred.size();
  for (const auto& p : pred) c.correct += gold_set.count(p);
  return c;
}

ChunkCounts count_chunks(const LabelSequences& gold, const LabelSequences& pred) {
  require_aligned(gold, pred);
  ChunkCounts total;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    auto g = extract_chunks(gold[s]);
    auto p = extract_chunks(pred[s]);
    total += count_chunks(g, p);
  }
  return total;
}

PrecisionRecallF1 chunk_prf(const ChunkCounts& c) {
  PrecisionRecallF1 r;
  r.precision = c.predicted > 0 ? 100.0 * static_cast<double>(c.correct) / static_cast<double>(c.predicted) : 0.0;
  r.recall = c.gold > 0 ? 100.0 * static_cast<double>(c.correct) / static_cast<double>(c.gold) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

PrecisionRecallF1 chunk_prf(std::span<const Chunk> gold, std::span<const Chunk> pred) {
  return chunk_prf(count_chunks(gold, pred));
}

EditCounts align(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return cost[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  // Backtrace, preferring match/substitution, then deletion, then insertion.
  EditCounts e;
  e.reference_length = n;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        e.substitutions += same ? 0 : 1;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++e.deletions;
      --i;
    } else {
      ++e.insertions;
      --j;
    }
  }
  return e;
}

double cer(const LabelSequences& gold_concepts, const LabelSequences& hyp_concepts,
           bool per_sentence_average) {
  if (gold_concepts.size() != hyp_concepts.size()) {
    throw std::invalid_argument("cer: corpora have different sentence counts");
  }
  EditCounts total;
  double sentence_sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t s = 0; s < gold_concepts.size(); ++s) {
    const EditCounts e = align(gold_concepts[s], hyp_concepts[s]);
    total += e;
    if (e.reference_length > 0) {
      sentence_sum += 100.0 * static_cast<double>(e.errors()) / static_cast<double>(e.reference_length);
      ++scored;
    }
  }
  if (total.reference_length == 0) throw std::invalid_argument("cer: no gold concepts");
  if (per_sentence_average) return sentence_sum / static_cast<double>(scored);
  return 100.0 * static_cast<double>(total.errors()) / static_cast<double>(total.reference_length);
}

EvalReport evaluate(const LabelSequences& gold, const LabelSequences& pred, bool per_sentence_cer) {
  require_aligned(gold, pred);
  EvalReport r;
  LabelSequences gold_concepts;
  LabelSequences pred_concepts;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      r.matching_tokens += gold[s][i] == pred[s][i] ? 1 : 0;
    }
    r.tokens += gold[s].size();
    auto g = extract_chunks(gold[s]);
    auto p = extract_chunks(pred[s]);
    r.chunks += count_chunks(g, p);
    std::vector<std::string> gc;
    std::vector<std::string> pc;
    for (auto& c : g) gc.push_back(std::move(c.type));
    for (auto& c : p) pc.push_back(std::move(c.type));
    r.edits += align(gc, pc);
    gold_concepts.push_back(std::move(gc));
    pred_concepts.push_back(std::move(pc));
  }
  r.accuracy = r.tokens > 0 ? 100.0 * static_cast<double>(r.matching_tokens) / static_cast<double>(r.tokens) : 0.0;
  const PrecisionRecallF1 prf = chunk_prf(r.chunks);
  r.precision = prf.precision;
  r.recall = prf.recall;
  r.f1 = prf.f1;
  if (r.edits.reference_length > 0) r.cer = cer(gold_concepts, pred_concepts, per_sentence_cer);
  return r;
}

std::string format_report(const EvalReport& r) {
  std::string out = fmt::format(
      "processed {} tokens with {} phrases; found: {} phrases; correct: {}.\n", r.tokens,
      r.chunks.gold, r.chunks.predicted, r.chunks.correct);
  out += fmt::format("accuracy: {:6.2f}%; precision: {:6.2f}%; recall: {:6.2f}%; FB1: {:6.2f}\n",
                     r.accuracy, r.precision, r.recall, r.f1);
  if (r.cer) {
    out += fmt::format("CER: {:6.2f}% (S={} D={} I={} over {} concepts)\n", *r.cer,
                       r.edits.substitutions, r.edits.deletions, r.edits.insertions,
                       r.edits.reference_length);
  } else {
    out += "CER: n/a (no gold concepts)\n";
  }
  return out;
}

std::string format_report_tsv(const EvalReport& r) {
  return fmt::format("{:.4f}\t{:.4f}\t{:.4f}\t{:.4f}\t{}", r.accuracy, r.precision, r.recall, r.f1,
                     r.cer ? fmt::format("{:.4f}", *r.cer) : std::string("nan"));
}

std::optional<Metric> parse_metric(std::string_view name) {
  if (name == "acc") return Metric::kAccuracy;
  if (name == "f1") return Metric::kF1;
  if (name == "cer") return Metric::kCer;
  return std::nullopt;
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kAccuracy: return "acc";
    case Metric::kF1: return "f1";
    case Metric::kCer: return "cer";
  }
  return "?";
}

namespace {

// Per-sentence sufficient statistics of one system's output.
struct SentenceStats {
  std::size_t matching = 0;
  std::size_t tokens = 0;
  ChunkCounts chunks;
  EditCounts edits;

  SentenceStats& operator+=(const SentenceStats& o) {
    matching += o.matching;
    tokens += o.tokens;
    chunks += o.chunks;
    edits += o.edits;
    return *this;
  }
};

SentenceStats sentence_stats(const std::vector<std::string>& gold,
                             const std::vector<std::string>& pred) {
  SentenceStats st;
  for (std::size_t i = 0; i < gold.size(); ++i) st.matching += gold[i] == pred[i] ? 1 : 0;
  st.tokens = gold.size();
  auto g = extract_chunks(gold);
  auto p = extract_chunks(pred);
  st.chunks = count_chunks(g, p);
  st.edits = align(concept_sequence(gold), concept_sequence(pred));
  return st;
}

double metric_value(Metric metric, const SentenceStats& st) {
  switch (metric) {
    case Metric::kAccuracy:
      return 100.0 * static_cast<double>(st.matching) / static_cast<double>(st.tokens);
    case Metric::kF1:
      return chunk_prf(st.chunks).f1;
    case Metric::kCer:
      return 100.0 * static_cast<double>(st.edits.errors()) /
             static_cast<double>(st.edits.reference_length);
  }
  return 0.0;
}

void require_defined(Metric metric, const SentenceStats& st) {
  if (metric == Metric::kAccuracy && st.tokens == 0) {
    throw std::invalid_argument("accuracy undefined: no tokens");
  }
  if (metric == Metric::kCer && st.edits.reference_length == 0) {
    throw std::invalid_argument("CER undefined: no gold concepts");
  }
}

}  // namespace

double corpus_metric(Metric metric, const LabelSequences& gold, const LabelSequences& pred) {
  require_aligned(gold, pred);
  SentenceStats total;
  for (std::size_t s = 0; s < gold.size(); ++s) total += sentence_stats(gold[s], pred[s]);
  require_defined(metric, total);
  return metric_value(metric, total);
}

SignificanceResult approx_randomization_test(const LabelSequences& a, const LabelSequences& b,
                                             const LabelSequences& gold, Metric metric,
                                             std::size_t rounds, std::uint64_t seed) {
  require_aligned(gold, a);
  require_aligned(gold, b);
  if (rounds < 1) throw std::invalid_argument("approx_randomization_test: rounds must be >= 1");
  const std::size_t n = gold.size();
  std::vector<SentenceStats> sa(n);
  std::vector<SentenceStats> sb(n);
  SentenceStats total_a;
  SentenceStats total_b;
  for (std::size_t s = 0; s < n; ++s) {
    sa[s] = sentence_stats(gold[s], a[s]);
    sb[s] = sentence_stats(gold[s], b[s]);
    total_a += sa[s];
    total_b += sb[s];
  }
  require_defined(metric, total_a);

  SignificanceResult result;
  result.observed_delta = std::abs(metric_value(metric, total_a) - metric_value(metric, total_b));
  auto shuffled_delta = [&](auto&& swapped) {
    SentenceStats x;
    SentenceStats y;
    for (std::size_t s = 0; s < n; ++s) {
      if (swapped(s)) {
        x += sb[s];
        y += sa[s];
      } else {
        x += sa[s];
        y += sb[s];
      }
    }
    return std::abs(metric_value(metric, x) - metric_value(metric, y));
  };
  const double threshold = result.observed_delta - kSignificanceTieTolerance;

  if (n < 63 && (std::uint64_t{1} << n) <= rounds) {
    const std::uint64_t patterns = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
      const double d = shuffled_delta([mask](std::size_t s) { return ((mask >> s) & 1U) != 0; });
      if (d >= threshold) ++result.at_least_as_extreme;
    }
    result.trials = patterns;
    result.exhaustive = true;
    result.p_value = static_cast<double>(result.at_least_as_extreme) / static_cast<double>(patterns);
    return result;
  }

  std::mt19937_64 rng(seed);
  std::vector<char> swap(n);
  for (std::size_t r = 0; r < rounds; ++r) {
    for (std::size_t s = 0; s < n; ++s) swap[s] = static_cast<char>(rng() >> 63);
    const double d = shuffled_delta([&swap](std::size_t s) { return swap[s] != 0; });
    if (d >= threshold) ++result.at_least_as_extreme;
  }
  result.trials = rounds;
  result.p_value = static_cast<double>(result.at_least_as_extreme + 1) / static_cast<double>(rounds + 1);
  return result;
}

}  // namespace s2b
