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

#include "s2b/vocabulary.hpp"

#include <stdexcept>
#include <unordered_map>

namespace s2b {

Vocabulary::Vocabulary() {
  add_word(kPadSymbol);
  add_word(kEosSymbol);
  add_word(kUnkSymbol);
  // Placeholders for the two reserved character rows; never looked up.
  chars_ = {0, 0};
}

void Vocabulary::add_word(std::string_view w) {
  if (word_index_.find(w) != word_index_.end()) return;
  word_index_.emplace(std::string(w), static_cast<int>(words_.size()));
  words_.emplace_back(w);
}

void Vocabulary::add_char(char32_t c) {
  if (char_index_.count(c) != 0) return;
  char_index_.emplace(c, static_cast<int>(chars_.size()));
  chars_.push_back(c);
}

void Vocabulary::add_label(std::string_view l) {
  if (label_index_.find(l) != label_index_.end()) return;
  label_index_.emplace(std::string(l), static_cast<int>(labels_.size()));
  labels_.emplace_back(l);
}

Vocabulary Vocabulary::build(const Corpus& corpus, int min_count) {
  if (corpus.sentences.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  std::unordered_map<std::string, int> freq;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) ++freq[t];
  }
  Vocabulary v;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) {
      if (freq[t] >= min_count) v.add_word(t);
      for (char32_t c : decode_utf8(t)) v.add_char(c);
    }
    for (const auto& l : s.labels) v.add_label(l);
  }
  return v;
}

Vocabulary Vocabulary::from_tables(std::vector<std::string> words, std::vector<std::string> chars,
                                   std::vector<std::string> labels) {
  if (words.size() < 3 || words[0] != kPadSymbol || words[1] != kEosSymbol ||
      words[2] != kUnkSymbol) {
    throw FormatError("word table lacks reserved entries");
  }
  if (chars.size() < 2 || chars[0] != kPadSymbol || chars[1] != kUnkSymbol) {
    throw FormatError("character table lacks reserved entries");
  }
  if (labels.size() < 2 || labels[labels.size() - 2] != kEosSymbol ||
      labels.back() != kBeginSymbol) {
    throw FormatError("label table lacks reserved entries");
  }
  Vocabulary v;
  for (std::size_t i = 3; i < words.size(); ++i) {
    if (v.word_index_.count(words[i]) != 0) throw FormatError("duplicate word: " + words[i]);
    v.add_word(words[i]);
  }
  for (std::size_t i = 2; i < chars.size(); ++i) {
    std::u32string cs = decode_utf8(chars[i]);
    if (cs.size() != 1) throw FormatError("character entry is not one scalar value");
    if (v.char_index_.count(cs[0]) != 0) throw FormatError("duplicate character entry");
    v.add_char(cs[0]);
  }
  for (std::size_t i = 0; i + 2 < labels.size(); ++i) {
    if (v.label_index_.count(labels[i]) != 0) throw FormatError("duplicate label: " + labels[i]);
    v.add_label(labels[i]);
  }
  return v;
}

int Vocabulary::word_id(std::string_view word) const {
  auto it = word_index_.find(word);
  return it == word_index_.end() ? kUnkWord : it->second;
}

int Vocabulary::char_id(char32_t c) const {
  auto it = char_index_.find(c);
  return it == char_index_.end() ? kUnkChar : it->second;
}

int Vocabulary::label_id(std::string_view label) const {
  auto it = label_index_.find(label);
  return it == label_index_.end() ? kNoLabel : it->second;
}

const std::string& Vocabulary::label_name(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= labels_.size()) {
    throw std::out_of_range("label id " + std::to_string(id) + " out of range");
  }
  return labels_[static_cast<std::size_t>(id)];
}

EncodedSentence Vocabulary::encode(std::span<const std::string> tokens) const {
  EncodedSentence e;
  e.words.reserve(tokens.size());
  e.chars.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (t.empty()) throw std::invalid_argument("encode: empty token");
    e.words.push_back(word_id(t));
    std::vector<int> cs;
    for (char32_t c : decode_utf8(t)) cs.push_back(char_id(c));
    e.chars.push_back(std::move(cs));
  }
  e.labels.assign(tokens.size(), kNoLabel);
  return e;
}

EncodedSentence Vocabulary::encode(const Sentence& sentence) const {
  EncodedSentence e = encode(std::span<const std::string>(sentence.tokens));
  if (!sentence.labels.empty()) {
    if (sentence.labels.size() != sentence.tokens.size()) {
      throw std::invalid_argument("encode: token and label counts differ");
    }
    for (std::size_t i = 0; i < sentence.labels.size(); ++i) {
      const int id = label_id(sentence.labels[i]);
      if (id == kNoLabel) throw std::invalid_argument("unknown label: " + sentence.labels[i]);
      e.labels[i] = id;
    }
  }
  return e;
}

std::vector<std::string> Vocabulary::char_table() const {
  std::vector<std::string> out{std::string(kPadSymbol), std::string(kUnkSymbol)};
  for (std::size_t i = 2; i < chars_.size(); ++i) out.push_back(encode_utf8(chars_[i]));
  return out;
}

std::vector<std::string> Vocabulary::label_table() const {
  std::vector<std::string> out = labels_;
  out.emplace_back(kEosSymbol);
  out.emplace_back(kBeginSymbol);
  return out;
}

bool Vocabulary::operator==(const Vocabulary& other) const {
  return words_ == other.words_ && chars_ == other.chars_ && labels_ == other.labels_;
}

}  // namespace s2b
