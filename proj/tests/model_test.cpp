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


#include <gtest/gtest.h>

#include "s2b/decoders.hpp"
#include "s2b/gradient_check.hpp"
#include "s2b/model.hpp"
#include "s2b/training.hpp"
#include "test_support.hpp"

namespace s2b {
namespace {

using testing::make_corpus;
using testing::tiny_arch;

Corpus five_label_corpus() {
  return make_corpus({{"ab cd ef", "O B-X I-X"}, {"gh ab", "B-Y I-Y"}});
}

TEST(Architecture, Validation) {
  Architecture a = tiny_arch();
  EXPECT_NO_THROW(a.validate());
  a.word_hidden = 7;
  EXPECT_THROW(a.validate(), std::invalid_argument);
  a = tiny_arch();
  a.decoder_hidden = 0;
  EXPECT_THROW(a.validate(), std::invalid_argument);
}

TEST(Model, ParameterCountMatchesHandTotal) {
  // Worked by hand for word rows 10, char rows 8 and 5 labels.
  EXPECT_EQ(parameter_count(tiny_arch(), 10, 8, 5), 1352);
}

TEST(Model, ParameterCountMatchesAllocatedTensors) {
  Vocabulary v = Vocabulary::build(testing::tiny_corpus());
  for (bool fw_only : {false, true}) {
    Architecture a = tiny_arch(fw_only);
    Model<double> m(v, a, 1);
    EXPECT_EQ(m.params().total_size(),
              parameter_count(a, static_cast<Index>(v.word_rows()), static_cast<Index>(v.char_rows()),
                              static_cast<Index>(v.num_labels())));
  }
  Architecture big;
  big.word_hidden = 20;
  big.decoder_hidden = 14;
  big.char_hidden = 8;
  Model<double> m(v, big, 1);
  EXPECT_EQ(m.params().total_size(),
            parameter_count(big, static_cast<Index>(v.word_rows()), static_cast<Index>(v.char_rows()),
                            static_cast<Index>(v.num_labels())));
}

TEST(Model, MediaProfileCountIsNearPublishedTotal) {
  // 2,210 word types and 99 labels; about 100 characters.
  const Index count = parameter_count(Architecture{}, 2210 + 3, 100 + 2, 99);
  const double published = 2139950.0;
  EXPECT_LT(std::abs(static_cast<double>(count) - published) / published, 0.25) << count;
}

TEST(Model, TensorShapes) {
  Vocabulary v = Vocabulary::build(five_label_corpus());
  Model<double> m(v, tiny_arch(), 3);
  EXPECT_EQ(m.num_labels(), 5);
  EXPECT_EQ(m.params().at("embedding.label").value.rows(), 7);
  EXPECT_EQ(m.params().at("char_gru.fwd.Wz").value.rows(), 3);
  EXPECT_EQ(m.params().at("word_gru.bwd.Wz").value.cols(), 10);
  EXPECT_EQ(m.params().at("decoder.fw.Uh").value.rows(), 6);
  EXPECT_EQ(m.params().at("output.bw.W").value.cols(), 12);
  EXPECT_EQ(m.params().at("output.fw.W").value.cols(), 18);
  Model<double> f(v, tiny_arch(true), 3);
  EXPECT_EQ(f.params().at("output.fw.W").value.cols(), 12);
}

TEST(Model, SeedDeterminesInitialization) {
  Vocabulary v = Vocabulary::build(five_label_corpus());
  Model<double> a(v, tiny_arch(), 7), b(v, tiny_arch(), 7), c(v, tiny_arch(), 8);
  EXPECT_EQ(a.params().snapshot(), b.params().snapshot());
  EXPECT_NE(a.params().snapshot(), c.params().snapshot());
}

TEST(Model, CastPreservesValues) {
  Vocabulary v = Vocabulary::build(five_label_corpus());
  Model<double> m(v, tiny_arch(), 7);
  Model<float> f = m.cast<float>();
  EXPECT_TRUE(f.params().at("decoder.bw.Wr").value.cast<double>().isApprox(
      m.params().at("decoder.bw.Wr").value, 1e-6));
  EXPECT_EQ(f.vocab(), m.vocab());
}

class FullGradient : public ::testing::TestWithParam<bool> {};

TEST_P(FullGradient, JointLossMatchesFiniteDifferences) {
  Corpus c = five_label_corpus();
  Vocabulary v = Vocabulary::build(c);
  Model<double> m(v, tiny_arch(GetParam()), 17);
  EncodedSentence s = v.encode(c.sentences[0]);
  ASSERT_EQ(s.size(), 3u);
  auto params = m.params().all();
  auto report = finite_difference_check(std::span<Parameter<double>* const>(params), [&](Graph<double>& g) {
    auto out = run_network(g, m, s, LabelSource::kGold, Dropout{});
    auto fw = log_probs<double>(std::span<const DecoderState<double>>(out.forward));
    auto bw = log_probs<double>(std::span<const DecoderState<double>>(out.backward));
    return sequence_loss(fw, bw, s.labels, params, 1e-2);
  });
  EXPECT_LT(report.max_relative_error, 1e-4)
      << report.worst_parameter << "[" << report.worst_index << "] analytic " << report.worst_analytic
      << " numeric " << report.worst_numeric;
  EXPECT_EQ(report.coordinates, static_cast<std::size_t>(m.params().total_size()));
}

INSTANTIATE_TEST_SUITE_P(Modes, FullGradient, ::testing::Values(false, true));

}  // namespace
}  // namespace s2b
