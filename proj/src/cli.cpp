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


#include "s2b/cli.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "s2b/corpus.hpp"
#include "s2b/decoders.hpp"
#include "s2b/metrics.hpp"
#include "s2b/serialization.hpp"

namespace s2b {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw std::invalid_argument(fmt::format("{}: cannot parse '{}'", key, text));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
  if (text == "0" || text == "false" || text == "no" || text == "off") return false;
  throw std::invalid_argument(fmt::format("{}: expected a boolean, got '{}'", key, text));
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

struct Setting {
  const char* key;
  const char* help;
  bool flag;
  Setter apply;
};

template <typename T, typename Field>
Setter number(Field field) {
  return [field](RunConfig& c, std::string_view key, std::string_view v) {
    field(c) = parse_number<T>(key, v);
  };
}

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = {
      {"train", "training corpus", false,
       [](RunConfig& c, std::string_view, std::string_view v) { c.train_path = std::string(v); }},
      {"dev", "development corpus", false,
       [](RunConfig& c, std::string_view, std::string_view v) { c.dev_path = std::string(v); }},
      {"test", "test corpus, scored after training", false,
       [](RunConfig& c, std::string_view, std::string_view v) { c.test_path = std::string(v); }},
      {"model", "output model file", false,
       [](RunConfig& c, std::string_view, std::string_view v) { c.model_path = std::string(v); }},
      {"log", "epoch log file (default stdout)", false,
       [](RunConfig& c, std::string_view, std::string_view v) { c.log_path = std::string(v); }},
      {"epochs", "training epochs", false, number<int>([](RunConfig& c) -> int& { return c.train.epochs; })},
      {"seed", "random seed", false,
       number<std::uint64_t>([](RunConfig& c) -> std::uint64_t& { return c.train.seed; })},
      {"segment-len", "segment length", false,
       number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.train.segment_length; })},
      {"segment-shift", "segment shift", false,
       number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.train.segment_shift; })},
      {"batching", "segments | clusters", false,
       [](RunConfig& c, std::string_view key, std::string_view v) {
         auto b = parse_batching(v);
         if (!b) throw std::invalid_argument(fmt::format("{}: expected segments or clusters", key));
         c.train.batching = *b;
       }},
      {"regime", "single | two-opt", false,
       [](RunConfig& c, std::string_view key, std::string_view v) {
         auto r = parse_regime(v);
         if (!r) throw std::invalid_argument(fmt::format("{}: expected single or two-opt", key));
         c.train.regime = *r;
       }},
      {"optimizer", "sgd | adam", false,
       [](RunConfig& c, std::string_view key, std::string_view v) {
         auto o = parse_optimizer(v);
         if (!o) throw std::invalid_argument(fmt::format("{}: expected sgd or adam", key));
         c.train.optimizer = *o;
       }},
      {"fw-only", "forward decoder without right label context", true,
       [](RunConfig& c, std::string_view key, std::string_view v) { c.arch.fw_only = parse_bool(key, v); }},
      {"lr", "base learning rate", false, number<double>([](RunConfig& c) -> double& { return c.train.base_lr; })},
      {"momentum", "SGD momentum", false,
       number<double>([](RunConfig& c) -> double& { return c.train.momentum; })},
      {"lambda", "L2 coefficient", false, number<double>([](RunConfig& c) -> double& { return c.train.lambda; })},
      {"dropout", "dropout rate", false, number<double>([](RunConfig& c) -> double& { return c.train.dropout; })},
      {"batch-size", "sequences per batch", false,
       number<std::size_t>([](RunConfig& c) -> std::size_t& { return c.train.batch_size; })},
      {"min-count", "minimum word frequency", false,
       number<int>([](RunConfig& c) -> int& { return c.train.min_count; })},
      {"clip-norm", "global gradient-norm clip (0 disables)", false,
       number<double>([](RunConfig& c) -> double& { return c.train.clip_norm; })},
      {"word-emb", "word embedding size", false,
       number<Index>([](RunConfig& c) -> Index& { return c.arch.word_embedding; })},
      {"char-emb", "character embedding size", false,
       number<Index>([](RunConfig& c) -> Index& { return c.arch.char_embedding; })},
      {"label-emb", "label embedding size", false,
       number<Index>([](RunConfig& c) -> Index& { return c.arch.label_embedding; })},
      {"char-hidden", "character layer size (both directions)", false,
       number<Index>([](RunConfig& c) -> Index& { return c.arch.char_hidden; })},
      {"word-hidden", "word layer size (both directions)", false,
       number<Index>([](RunConfig& c) -> Index& { return c.arch.word_hidden; })},
      {"decoder-hidden", "decoder layer size", false,
       number<Index>([](RunConfig& c) -> Index& { return c.arch.decoder_hidden; })},
  };
  return table;
}

const Setting* find_setting(std::string_view key) {
  for (const auto& s : settings()) {
    if (key == s.key) return &s;
  }
  return nullptr;
}

class CliError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Output goes to --out when given, otherwise to the command's stdout.
class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw CliError("cannot open " + path + " for writing");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw CliError("failed writing output");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

Corpus load_corpus(const std::string& path, ColumnPolicy policy) {
  if (!std::filesystem::exists(path)) throw CliError("no such file: " + path);
  return read_conll(path, policy);
}

// Last-column labels of a column file, checked against `tokens` when given.
LabelSequences label_column(const std::string& path, const Corpus* aligned_with, std::size_t from_end = 0) {
  std::ifstream in(path);
  if (!in) throw CliError("no such file: " + path);
  auto blocks = read_column_blocks(in, path);
  if (aligned_with != nullptr && blocks.size() != aligned_with->size()) {
    throw CliError(fmt::format("{}: {} sentences, expected {}", path, blocks.size(), aligned_with->size()));
  }
  LabelSequences out;
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    auto& seq = out.emplace_back();
    if (aligned_with != nullptr && blocks[s].size() != aligned_with->sentences[s].size()) {
      throw CliError(fmt::format("{}: sentence {} has {} tokens, expected {}", path, s + 1,
                                 blocks[s].size(), aligned_with->sentences[s].size()));
    }
    for (std::size_t t = 0; t < blocks[s].size(); ++t) {
      const auto& row = blocks[s][t];
      if (row.size() < 2 + from_end) throw CliError(fmt::format("{}: sentence {} lacks a label column", path, s + 1));
      if (aligned_with != nullptr && row.front() != aligned_with->sentences[s].tokens[t]) {
        throw CliError(fmt::format("{}: sentence {} token {} is '{}', expected '{}'", path, s + 1, t + 1,
                                   row.front(), aligned_with->sentences[s].tokens[t]));
      }
      seq.push_back(row[row.size() - 1 - from_end]);
    }
  }
  return out;
}

void print_metric(std::ostream& out, const EvalReport& r, const std::string& metric) {
  if (metric == "all") {
    out << format_report(r) << format_report_tsv(r) << '\n';
    return;
  }
  auto m = parse_metric(metric);
  if (!m) throw CliError("unknown metric " + metric);
  double v = 0.0;
  switch (*m) {
    case Metric::kAccuracy: v = r.accuracy; break;
    case Metric::kF1: v = r.f1; break;
    case Metric::kCer:
      if (!r.cer) throw CliError("CER is undefined: the gold data has no concepts");
      v = *r.cer;
      break;
  }
  out << fmt::format("{}\t{:.4f}\n", metric_name(*m), v);
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string profile;
  std::string config;
  bool param_count = false;
  long num_words = -1;
  long num_labels = -1;
  long num_chars = 100;
  std::map<std::string, std::string> values;  // flag values by key
  std::map<std::string, bool> flags;
};

int cmd_train(const TrainArgs& a, CLI::App& sub, std::ostream& out, std::ostream& err) {
  std::map<std::string, std::string> file;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw CliError("cannot read config file " + a.config);
    file = parse_config_file(in);
  }
  std::string profile = "media";
  if (auto it = file.find("profile"); it != file.end()) profile = it->second;
  if (!a.profile.empty()) profile = a.profile;
  RunConfig cfg = profile_defaults(profile);
  for (const auto& [k, v] : file) {
    if (k == "profile") continue;
    apply_setting(cfg, k, v);
  }
  for (const auto& s : settings()) {
    if (sub.get_option(std::string("--") + s.key)->count() == 0) continue;
    if (s.flag) apply_setting(cfg, s.key, a.flags.at(s.key) ? "1" : "0");
    else apply_setting(cfg, s.key, a.values.at(s.key));
  }
  cfg.arch.validate();
  cfg.train.validate();

  if (a.param_count) {
    Index words = 0, chars = 0, labels = 0;
    if (!cfg.train_path.empty()) {
      Corpus train = load_corpus(cfg.train_path.string(), ColumnPolicy::kTokenAndLabel);
      Vocabulary v = Vocabulary::build(train, cfg.train.min_count);
      words = static_cast<Index>(v.word_rows());
      chars = static_cast<Index>(v.char_rows());
      labels = static_cast<Index>(v.num_labels());
    } else {
      if (a.num_words < 1 || a.num_labels < 1 || a.num_chars < 1) {
        throw CliError("--param-count needs --train, or --num-words and --num-labels");
      }
      const Vocabulary empty;
      words = a.num_words + static_cast<Index>(empty.word_rows());
      chars = a.num_chars + static_cast<Index>(empty.char_rows());
      labels = a.num_labels;
    }
    out << parameter_count(cfg.arch, words, chars, labels) << '\n';
    return 0;
  }

  if (cfg.train_path.empty()) throw CliError("--train is required");
  if (cfg.model_path.empty()) throw CliError("--model is required");
  Corpus train = load_corpus(cfg.train_path.string(), ColumnPolicy::kTokenAndLabel);
  Corpus dev;
  if (!cfg.dev_path.empty()) dev = load_corpus(cfg.dev_path.string(), ColumnPolicy::kTokenAndLabel);
  Corpus test;
  if (!cfg.test_path.empty()) test = load_corpus(cfg.test_path.string(), ColumnPolicy::kTokenAndLabel);

  OutputSink log(cfg.log_path.string(), out);
  // Fail on an unwritable model path before spending time on training.
  {
    std::ofstream probe(cfg.model_path, std::ios::binary | std::ios::app);
    if (!probe) throw CliError("cannot write model file " + cfg.model_path.string());
  }
  FitResult result = fit(cfg.arch, cfg.train, train, dev, [&](const EpochRecord& r) {
    log.get() << format_epoch_record(r) << '\n';
    log.get().flush();
  });
  log.finish();
  save_model(result.model, cfg.model_path);
  if (result.best_epoch > 0) err << fmt::format("kept epoch {}\n", result.best_epoch);
  if (test.size() > 0) out << format_report(evaluate_model(result.model, test));
  return 0;
}

int cmd_tag(const std::string& model_path, const std::string& input, const std::string& out_path,
            std::ostream& out) {
  if (model_path.empty()) throw CliError("--model is required");
  if (input.empty()) throw CliError("--test is required");
  Model<double> model = load_model(model_path);
  Corpus corpus = load_corpus(input, ColumnPolicy::kTokenOnly);
  OutputSink sink(out_path, out);
  for (const auto& s : corpus.sentences) {
    auto labels = tag_sentence(model, std::span<const std::string>(s.tokens));
    for (std::size_t i = 0; i < s.size(); ++i) sink.get() << s.tokens[i] << '\t' << labels[i] << '\n';
    sink.get() << '\n';
  }
  sink.finish();
  return 0;
}

struct EvalArgs {
  std::string model, test, gold, pred, out, metric = "all";
  bool cer_per_sentence = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  LabelSequences gold, pred;
  if (!a.model.empty()) {
    if (a.test.empty()) throw CliError("--model needs --test");
    Model<double> model = load_model(a.model);
    Corpus test = load_corpus(a.test, ColumnPolicy::kTokenAndLabel);
    gold = gold_labels(test);
    pred = tag_corpus(model, test);
  } else if (!a.pred.empty()) {
    const std::string& gold_path = a.gold.empty() ? a.test : a.gold;
    if (gold_path.empty()) throw CliError("--pred needs --gold");
    Corpus g = load_corpus(gold_path, ColumnPolicy::kTokenAndLabel);
    gold = gold_labels(g);
    pred = label_column(a.pred, &g);
  } else {
    const std::string& path = a.test.empty() ? a.gold : a.test;
    if (path.empty()) throw CliError("give --gold and --pred, a three-column --test, or --model and --test");
    gold = label_column(path, nullptr, 1);
    pred = label_column(path, nullptr, 0);
  }
  EvalReport report = evaluate(gold, pred, a.cer_per_sentence);
  OutputSink sink(a.out, out);
  print_metric(sink.get(), report, a.metric);
  sink.finish();
  return 0;
}

struct SigArgs {
  std::string gold, sys_a, sys_b, out, metric = "f1";
  std::size_t rounds = 10000;
  std::uint64_t seed = 1;
};

int cmd_sigtest(const SigArgs& a, std::ostream& out) {
  if (a.gold.empty() || a.sys_a.empty() || a.sys_b.empty()) {
    throw CliError("--gold, --sys-a and --sys-b are required");
  }
  auto metric = parse_metric(a.metric);
  if (!metric) throw CliError("sigtest needs --metric acc, f1 or cer");
  if (a.rounds < 1) throw CliError("--rounds must be >= 1");
  Corpus g = load_corpus(a.gold, ColumnPolicy::kTokenAndLabel);
  LabelSequences gold = gold_labels(g);
  LabelSequences sa = label_column(a.sys_a, &g);
  LabelSequences sb = label_column(a.sys_b, &g);
  SignificanceResult r = approx_randomization_test(sa, sb, gold, *metric, a.rounds, a.seed);
  OutputSink sink(a.out, out);
  auto& o = sink.get();
  o << fmt::format("metric\t{}\n", metric_name(*metric));
  o << fmt::format("system_a\t{:.4f}\n", corpus_metric(*metric, gold, sa));
  o << fmt::format("system_b\t{:.4f}\n", corpus_metric(*metric, gold, sb));
  o << fmt::format("delta\t{:.4f}\n", r.observed_delta);
  o << fmt::format("rounds\t{}\n", a.rounds);
  o << fmt::format("seed\t{}\n", a.seed);
  o << fmt::format("mode\t{}\n", r.exhaustive ? "exhaustive" : "sampled");
  o << fmt::format("p_value\t{:.6g}\n", r.p_value);
  sink.finish();
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

RunConfig profile_defaults(std::string_view profile) {
  RunConfig c;
  if (profile == "media") return c;
  if (profile == "wsj") {
    c.arch.word_embedding = 300;
    c.arch.word_hidden = 150;
    c.arch.decoder_hidden = 150;
    c.train.optimizer = OptimizerKind::kAdam;
    c.train.base_lr = 0.001;
    c.train.epochs = 52;
    c.train.batching = Batching::kClusters;
    return c;
  }
  throw std::invalid_argument(fmt::format("unknown profile '{}' (media or wsj)", profile));
}

std::map<std::string, std::string> parse_config_file(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(fmt::format("config line {}: expected key=value", line_no));
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(fmt::format("config line {}: empty key", line_no));
    if (!out.emplace(key, value).second) {
      throw std::invalid_argument(fmt::format("config line {}: repeated key '{}'", line_no, key));
    }
  }
  return out;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  const Setting* s = find_setting(key);
  if (s == nullptr) throw std::invalid_argument(fmt::format("unknown setting '{}'", key));
  s->apply(config, key, value);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequence tagger with an encoder and two label decoders", "s2b"};
  app.require_subcommand(1);

  // train
  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "train a model");
  train->add_option("--profile", ta.profile, "media | wsj");
  train->add_option("--config", ta.config, "key=value settings file; flags take precedence");
  train->add_flag("--param-count", ta.param_count, "print the trainable-parameter count and exit");
  train->add_option("--num-words", ta.num_words, "word types, for --param-count without --train");
  train->add_option("--num-labels", ta.num_labels, "label count, for --param-count without --train");
  train->add_option("--num-chars", ta.num_chars, "character types, for --param-count")->capture_default_str();
  for (const auto& s : settings()) {
    if (s.flag) {
      ta.flags[s.key] = false;
      train->add_flag(std::string("--") + s.key, ta.flags[s.key], s.help);
    } else {
      train->add_option(std::string("--") + s.key, ta.values[s.key], s.help);
    }
  }

  // tag
  std::string tag_model, tag_input, tag_out;
  CLI::App* tag = app.add_subcommand("tag", "label a token file");
  tag->add_option("--model", tag_model, "model file");
  tag->add_option("--test,--input", tag_input, "token file (first column is read)");
  tag->add_option("--out", tag_out, "output file (default stdout)");

  // eval
  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "score predicted labels");
  eval->add_option("--gold", ea.gold, "gold column file");
  eval->add_option("--pred", ea.pred, "predicted column file");
  eval->add_option("--test", ea.test, "token/gold/pred file, or labelled data with --model");
  eval->add_option("--model", ea.model, "tag --test with this model and score it");
  eval->add_option("--metric", ea.metric, "acc | f1 | cer | all")->capture_default_str();
  eval->add_flag("--cer-per-sentence", ea.cer_per_sentence, "average CER over sentences");
  eval->add_option("--out", ea.out, "output file (default stdout)");

  // sigtest
  SigArgs sa;
  CLI::App* sig = app.add_subcommand("sigtest", "approximate randomization test");
  sig->add_option("--gold", sa.gold, "gold column file");
  sig->add_option("--sys-a", sa.sys_a, "system A column file");
  sig->add_option("--sys-b", sa.sys_b, "system B column file");
  sig->add_option("--metric", sa.metric, "acc | f1 | cer")->capture_default_str();
  sig->add_option("--rounds", sa.rounds, "shuffles")->capture_default_str();
  sig->add_option("--seed", sa.seed, "random seed")->capture_default_str();
  sig->add_option("--out", sa.out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (train->parsed()) return cmd_train(ta, *train, out, err);
    if (tag->parsed()) return cmd_tag(tag_model, tag_input, tag_out, out);
    if (eval->parsed()) return cmd_eval(ea, out);
    if (sig->parsed()) return cmd_sigtest(sa, out);
  } catch (const std::exception& e) {
    err << "s2b: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace s2b
