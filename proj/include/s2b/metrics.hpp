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

// Evaluation: token accuracy, conlleval-compatible chunk precision / recall /
// F1, concept error rate from a Levenshtein alignment of concept sequences,
// and the approximate-randomization significance test.
//
// Chunk labels use the prefix convention (B-TYPE, I-TYPE, O). Suffix-style
// labels (TYPE-B, TYPE-I) are normalized on the way in.

#ifndef S2B_METRICS_HPP_
#define S2B_METRICS_HPP_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace s2b {

using LabelSequences = std::vector<std::vector<std::string>>;

struct Chunk {
  std::string type;
  std::size_t begin = 0;  // inclusive
  std::size_t end = 0;    // inclusive

  auto operator<=>(const Chunk&) const = default;
};

// "Answer-B" -> "B-Answer", "Answer-I" -> "I-Answer"; anything else unchanged.
std::string normalize_bio(std::string_view label);

// Chunks in order of appearance, following the chunk boundary rules of the
// CoNLL evaluation script (an I- after O or after another type opens a chunk).
std::vector<Chunk> extract_chunks(std::span<const std::string> labels);

// Type of each chunk, in order.
std::vector<std::string> concept_sequence(std::span<const std::string> labels);

// Percentage of positions where pred equals gold, pooled over sentences.
double token_accuracy(const LabelSequences& gold, const LabelSequences& pred);

struct ChunkCounts {
  std::size_t correct = 0;
  std::size_t gold = 0;
  std::size_t predicted = 0;

  ChunkCounts& operator+=(const ChunkCounts& o) {
    correct += o.correct;
    gold += o.gold;
    predicted += o.predicted;
    return *this;
  }
};

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// A predicted chunk is correct iff a gold chunk has the same type and span.
ChunkCounts count_chunks(std::span<const Chunk> gold, std::span<const Chunk> pred);
ChunkCounts count_chunks(const LabelSequences& gold, const LabelSequences& pred);

// Percentages; F1 is 0 when precision + recall is 0.
PrecisionRecallF1 chunk_prf(const ChunkCounts& counts);
PrecisionRecallF1 chunk_prf(std::span<const Chunk> gold, std::span<const Chunk> pred);

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_length = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  EditCounts& operator+=(const EditCounts& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    reference_length += o.reference_length;
    return *this;
  }
};

// Unit-cost minimum edit alignment of hyp against ref.
EditCounts align(std::span<const std::string> ref, std::span<const std::string> hyp);

// Concept error rate in percent over concept (chunk type) sequences. Pooled:
// 100 * sum(S+D+I) / sum(|gold|). Per-sentence: mean over sentences with a
// non-empty reference. Throws if there is no gold concept at all.
double cer(const LabelSequences& gold_concepts, const LabelSequences& hyp_concepts,
           bool per_sentence_average = false);

struct EvalReport {
  std::size_t tokens = 0;
  std::size_t matching_tokens = 0;
  ChunkCounts chunks;
  EditCounts edits;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> cer;  // undefined when gold has no concepts
};

// Labels may use either BIO affix style.
EvalReport evaluate(const LabelSequences& gold, const LabelSequences& pred,
                    bool per_sentence_cer = false);

// conlleval-like summary lines.
std::string format_report(const EvalReport& report);
// accuracy, precision, recall, f1, cer separated by tabs.
std::string format_report_tsv(const EvalReport& report);

enum class Metric { kAccuracy, kF1, kCer };

std::optional<Metric> parse_metric(std::string_view name);
std::string_view metric_name(Metric m);

double corpus_metric(Metric metric, const LabelSequences& gold, const LabelSequences& pred);

struct SignificanceResult {
  double p_value = 1.0;
  double observed_delta = 0.0;
  std::size_t at_least_as_extreme = 0;
  std::size_t trials = 0;
  bool exhaustive = false;
};

// Approximate randomization: swaps the outputs of systems A and B on each
// sentence with probability 1/2 and counts how often the shuffled metric gap
// |m(A') - m(B')| reaches the observed gap. With R rounds the p-value is
// (count + 1) / (R + 1). When 2^n <= R for n sentences every swap pattern is
// enumerated instead and p = count / 2^n.
SignificanceResult approx_randomization_test(const LabelSequences& a, const LabelSequences& b,
                                             const LabelSequences& gold, Metric metric,
                                             std::size_t rounds = 10000, std::uint64_t seed = 1);

// Gaps within this distance of the observed one count as ties.
inline constexpr double kSignificanceTieTolerance = 1e-9;

}  // namespace s2b

#endif  // S2B_METRICS_HPP_
