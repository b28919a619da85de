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


#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "s2b/cli.hpp"
#include "s2b/serialization.hpp"
#include "test_support.hpp"

namespace s2b {
namespace {

using testing::slurp;
using testing::TempDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "s2b");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

const char* kToyTrain =
    "the\tO\ncat\tB-X\nsat\tI-X\n\n"
    "a\tB-Y\ndog\tI-Y\nran\tO\nhome\tB-Z\n\n"
    "cats\tB-X\nsit\tO\n\n";

std::vector<std::string> tiny_flags() {
  return {"--word-emb", "4", "--char-emb", "4", "--label-emb", "4", "--char-hidden", "6",
          "--word-hidden", "6", "--decoder-hidden", "6", "--segment-len", "3", "--batch-size", "2"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// --- configuration ----------------------------------------------------------

TEST(Profiles, Defaults) {
  RunConfig m = profile_defaults("media");
  EXPECT_EQ(m.arch.word_embedding, 200);
  EXPECT_EQ(m.arch.char_embedding, 30);
  EXPECT_EQ(m.arch.label_embedding, 150);
  EXPECT_EQ(m.arch.char_hidden, 100);
  EXPECT_EQ(m.arch.word_hidden, 300);
  EXPECT_EQ(m.arch.decoder_hidden, 300);
  EXPECT_EQ(m.train.epochs, 40);
  EXPECT_DOUBLE_EQ(m.train.base_lr, 0.125);
  EXPECT_DOUBLE_EQ(m.train.momentum, 0.9);
  EXPECT_DOUBLE_EQ(m.train.lambda, 1e-4);
  EXPECT_DOUBLE_EQ(m.train.dropout, 0.5);
  EXPECT_EQ(m.train.batch_size, 100u);
  EXPECT_EQ(m.train.segment_length, 10u);
  EXPECT_EQ(m.train.batching, Batching::kSegments);
  EXPECT_EQ(m.train.optimizer, OptimizerKind::kSgdMomentum);

  RunConfig w = profile_defaults("wsj");
  EXPECT_EQ(w.arch.word_embedding, 300);
  EXPECT_EQ(w.arch.word_hidden, 150);
  EXPECT_EQ(w.train.optimizer, OptimizerKind::kAdam);
  EXPECT_EQ(w.train.epochs, 52);
  EXPECT_EQ(w.train.batching, Batching::kClusters);
  EXPECT_THROW(profile_defaults("atis"), std::invalid_argument);
}

TEST(ConfigFile, ParsesKeyValueLines) {
  std::istringstream in("# comment\n\n epochs = 3 \nlr=0.5\nfw-only=true\n");
  auto kv = parse_config_file(in);
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv["epochs"], "3");
  EXPECT_EQ(kv["lr"], "0.5");
  RunConfig c = profile_defaults("media");
  for (const auto& [k, v] : kv) apply_setting(c, k, v);
  EXPECT_EQ(c.train.epochs, 3u);
  EXPECT_DOUBLE_EQ(c.train.base_lr, 0.5);
  EXPECT_TRUE(c.arch.fw_only);
}

TEST(ConfigFile, Errors) {
  std::istringstream repeated("epochs=1\nepochs=2\n");
  EXPECT_THROW(parse_config_file(repeated), std::invalid_argument);
  std::istringstream malformed("epochs 1\n");
  EXPECT_THROW(parse_config_file(malformed), std::invalid_argument);
  RunConfig c;
  EXPECT_THROW(apply_setting(c, "learning-rate", "1"), std::invalid_argument);
  EXPECT_THROW(apply_setting(c, "epochs", "many"), std::invalid_argument);
  EXPECT_THROW(apply_setting(c, "batching", "random"), std::invalid_argument);
}

// --- train ------------------------------------------------------------------

TEST(Train, ZeroEpochsWritesInitializedModel) {
  TempDir dir;
  auto train = dir.write("train.conll", kToyTrain);
  auto model = dir.file("m.bin");
  Outcome r = run(concat({"train", "--train", train.string(), "--model", model.string(), "--epochs", "0"}, tiny_flags()));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "");
  Model<double> m = load_model(model);
  EXPECT_EQ(m.arch().word_hidden, 6);
}

TEST(Train, MissingTrainFileFails) {
  TempDir dir;
  Outcome r = run({"train", "--train", dir.file("absent.conll").string(), "--model", dir.file("m.bin").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("s2b: error"), std::string::npos);
  EXPECT_EQ(r.out, "");
}

TEST(Train, UnwritableModelPathFails) {
  TempDir dir;
  auto train = dir.write("train.conll", kToyTrain);
  Outcome r = run({"train", "--train", train.string(), "--model", dir.file("no/such/dir/m.bin").string(), "--epochs", "0"});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(r.err.empty());
}

TEST(Train, LogHasOneLinePerEpochAndIsDeterministic) {
  TempDir dir;
  auto train = dir.write("train.conll", kToyTrain);
  auto args = concat({"train", "--train", train.string(), "--dev", train.string(), "--epochs", "3", "--seed", "4"},
                     tiny_flags());
  Outcome a = run(concat(args, {"--model", dir.file("a.bin").string(), "--log", dir.file("a.log").string()}));
  Outcome b = run(concat(args, {"--model", dir.file("b.bin").string(), "--log", dir.file("b.log").string()}));
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const std::string log = slurp(dir.file("a.log"));
  EXPECT_EQ(count_lines(log), 3u);
  EXPECT_EQ(log, slurp(dir.file("b.log")));
  EXPECT_EQ(slurp(dir.file("a.bin")), slurp(dir.file("b.bin")));
  EXPECT_NE(a.err.find("kept epoch"), std::string::npos);
}

TEST(Train, FlagsOverrideConfigFile) {
  TempDir dir;
  auto train = dir.write("train.conll", kToyTrain);
  auto cfg = dir.write("run.cfg", "epochs=4\nseed=2\n");
  Outcome r = run(concat({"train", "--config", cfg.string(), "--train", train.string(), "--model",
                      dir.file("m.bin").string(), "--epochs", "2"},
                     tiny_flags()));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 2u);
  Outcome from_file = run(concat({"train", "--config", cfg.string(), "--train", train.string(), "--model",
                              dir.file("m2.bin").string()},
                             tiny_flags()));
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(count_lines(from_file.out), 4u);
}

TEST(Train, UnknownConfigKeyFails) {
  TempDir dir;
  auto train = dir.write("train.conll", kToyTrain);
  auto cfg = dir.write("run.cfg", "epochs=1\nwarmup=3\n");
  Outcome r = run({"train", "--config", cfg.string(), "--train", train.string(), "--model", dir.file("m.bin").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("warmup"), std::string::npos);
}

TEST(Train, ParamCountMediaProfile) {
  Outcome r = run({"train", "--profile", "media", "--param-count", "--num-words", "2210", "--num-labels", "99"});
  ASSERT_EQ(r.code, 0) << r.err;
  const double n = std::stod(r.out);
  EXPECT_LE(std::abs(n - 2139950.0), 0.25 * 2139950.0);
  Outcome bad = run({"train", "--param-count"});
  EXPECT_NE(bad.code, 0);
}

// --- tag --------------------------------------------------------------------

struct Trained : ::testing::Test {
  TempDir dir;
  std::filesystem::path model;
  void SetUp() override {
    auto train = dir.write("train.conll", kToyTrain);
    model = dir.file("m.bin");
    Outcome r = run(concat({"train", "--train", train.string(), "--model", model.string(), "--epochs", "1"}, tiny_flags()));
    ASSERT_EQ(r.code, 0) << r.err;
  }
};

TEST_F(Trained, EmptyInputGivesEmptyOutput) {
  auto empty = dir.write("empty.txt", "");
  Outcome r = run({"tag", "--model", model.string(), "--input", empty.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "");
}

TEST_F(Trained, RerunIsByteIdentical) {
  auto input = dir.write("in.txt", "the\ncat\n\nunseen\nwords\nhere\n\n");
  Outcome a = run({"tag", "--model", model.string(), "--input", input.string()});
  Outcome b = run({"tag", "--model", model.string(), "--input", input.string(), "--out", dir.file("o.txt").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, slurp(dir.file("o.txt")));
  EXPECT_EQ(b.out, "");
  EXPECT_EQ(count_lines(a.out), 7u);
  EXPECT_EQ(a.out.substr(0, 4), "the\t");
}

TEST_F(Trained, EvalWithModel) {
  auto test = dir.write("test.conll", kToyTrain);
  Outcome r = run({"eval", "--model", model.string(), "--test", test.string(), "--metric", "acc"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 4), "acc\t");
}

TEST(Tag, MissingModelFails) {
  TempDir dir;
  auto input = dir.write("in.txt", "a\n");
  Outcome r = run({"tag", "--model", dir.file("none.bin").string(), "--input", input.string()});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("s2b: error"), std::string::npos);
}

// --- eval and sigtest --------------------------------------------------------

TEST(Eval, GoldEqualsPred) {
  TempDir dir;
  auto f = dir.write("gp.conll", "a\tB-X\tB-X\nb\tI-X\tI-X\nc\tO\tO\n\nd\tB-Y\tB-Y\n\n");
  Outcome r = run({"eval", "--test", f.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("100.0000\t100.0000\t100.0000\t100.0000\t0.0000"), std::string::npos) << r.out;
  EXPECT_EQ(run({"eval", "--test", f.string(), "--metric", "cer"}).out, "cer\t0.0000\n");
  EXPECT_EQ(run({"eval", "--test", f.string(), "--metric", "f1"}).out, "f1\t100.0000\n");
}

TEST(Eval, ReferenceFixture) {
  const std::string f = std::string(S2B_FIXTURE_DIR) + "/adversarial.conll";
  EXPECT_EQ(run({"eval", "--test", f, "--metric", "f1"}).out.substr(0, 10), "f1\t51.9774");
  EXPECT_EQ(run({"eval", "--test", f, "--metric", "cer"}).out, "cer\t53.3333\n");
  Outcome all = run({"eval", "--test", f});
  EXPECT_NE(all.out.find("processed 183 tokens with 75 phrases; found: 102 phrases; correct: 46."), std::string::npos)
      << all.out;
}

TEST(Eval, SeparateFilesMustAlign) {
  TempDir dir;
  auto gold = dir.write("g.conll", "a\tB-X\nb\tO\n\n");
  auto good = dir.write("p.conll", "a\tB-X\nb\tB-Y\n\n");
  auto shifted = dir.write("q.conll", "a\tB-X\n\n");
  auto renamed = dir.write("r.conll", "a\tB-X\nc\tO\n\n");
  Outcome ok = run({"eval", "--gold", gold.string(), "--pred", good.string(), "--metric", "acc"});
  EXPECT_EQ(ok.out, "acc\t50.0000\n");
  EXPECT_NE(run({"eval", "--gold", gold.string(), "--pred", shifted.string()}).code, 0);
  EXPECT_NE(run({"eval", "--gold", gold.string(), "--pred", renamed.string()}).code, 0);
}

TEST(Sigtest, IdenticalSystemsGiveOne) {
  TempDir dir;
  auto gold = dir.write("g.conll", "a\tB-X\nb\tO\n\nc\tB-Y\n\n");
  auto sys = dir.write("s.conll", "a\tB-X\nb\tB-X\n\nc\tO\n\n");
  Outcome r = run({"sigtest", "--gold", gold.string(), "--sys-a", sys.string(), "--sys-b", sys.string(), "--rounds",
               "100", "--seed", "7"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("p_value\t1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("rounds\t100\n"), std::string::npos);
  EXPECT_NE(r.out.find("seed\t7\n"), std::string::npos);
}

TEST(Sigtest, DeterministicGivenSeed) {
  const std::string f = std::string(S2B_FIXTURE_DIR) + "/adversarial.conll";
  TempDir dir;
  // Split the fixture into gold and a system column file.
  std::istringstream in(slurp(f));
  std::string gold, sys, line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      gold += "\n";
      sys += "\n";
      continue;
    }
    auto cols = testing::split(line);
    gold += cols[0] + "\t" + cols[1] + "\n";
    sys += cols[0] + "\t" + cols[2] + "\n";
  }
  auto g = dir.write("g.conll", gold);
  auto s = dir.write("s.conll", sys);
  std::vector<std::string> args{"sigtest", "--gold", g.string(), "--sys-a", g.string(), "--sys-b", s.string(),
                                "--rounds", "200", "--seed", "3"};
  Outcome a = run(args);
  Outcome b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("mode\tsampled"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(run({}).code, 0);
  EXPECT_NE(run({"frobnicate"}).code, 0);
  Outcome help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("sigtest"), std::string::npos);
}

}  // namespace
}  // namespace s2b
