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

#ifndef S2B_VOCABULARY_HPP_
#define S2B_VOCABULARY_HPP_

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "s2b/corpus.hpp"

namespace s2b {

// Integer view of a sentence. labels[i] == Vocabulary::kNoLabel marks a
// position without a usable gold label (padding, or unlabelled input).
struct EncodedSentence {
  std::vector<int> words;
  std::vector<std::vector<int>> chars;
  std::vector<int> labels;

  std::size_t size() const { return words.size(); }
};

// Word, character and label inventories.
//
// Word ids 0, 1, 2 are <s> (padding), <EOS> and <unk>; character ids 0 and 1
// are padding and <unk>. Real labels take ids 0..K-1 so that output-layer
// indices are label ids; the label embedding table has two extra rows, <EOS>
// at K and the begin-of-sequence symbol at K+1.
class Vocabulary {
 public:
  static constexpr int kPadWord = 0;
  static constexpr int kEosWord = 1;
  static constexpr int kUnkWord = 2;
  static constexpr int kPadChar = 0;
  static constexpr int kUnkChar = 1;
  static constexpr int kNoLabel = -1;

  static constexpr std::string_view kPadSymbol = "<s>";
  static constexpr std::string_view kEosSymbol = "<EOS>";
  static constexpr std::string_view kUnkSymbol = "<unk>";
  static constexpr std::string_view kBeginSymbol = "<BOS>";

  Vocabulary();

  // Ids follow first appearance in the corpus. Words seen fewer than
  // min_count times map to <unk>.
  static Vocabulary build(const Corpus& corpus, int min_count = 1);

  // Rebuilds from the tables produced by word_table() etc.
  static Vocabulary from_tables(std::vector<std::string> words, std::vector<std::string> chars,
                                std::vector<std::string> labels);

  int word_id(std::string_view word) const;
  int char_id(char32_t c) const;
  // kNoLabel when the label is unknown.
  int label_id(std::string_view label) const;
  const std::string& label_name(int id) const;

  std::size_t word_rows() const { return words_.size(); }
  std::size_t char_rows() const { return chars_.size(); }
  std::size_t num_labels() const { return labels_.size(); }
  std::size_t label_rows() const { return labels_.size() + 2; }
  int eos_label() const { return static_cast<int>(labels_.size()); }
  int begin_label() const { return static_cast<int>(labels_.size()) + 1; }

  // Unknown words map to <unk>, unknown characters to the character <unk>.
  // Labels are left as kNoLabel. Throws on an empty token.
  EncodedSentence encode(std::span<const std::string> tokens) const;
  // As above, plus gold labels; throws if a label is not in the inventory.
  EncodedSentence encode(const Sentence& sentence) const;

  const std::vector<std::string>& word_table() const { return words_; }
  std::vector<std::string> char_table() const;
  std::vector<std::string> label_table() const;

  bool operator==(const Vocabulary& other) const;

 private:
  std::vector<std::string> words_;
  std::vector<char32_t> chars_;  // entries 0 and 1 are placeholders
  std::vector<std::string> labels_;
  std::map<std::string, int, std::less<>> word_index_;
  std::map<char32_t, int> char_index_;
  std::map<std::string, int, std::less<>> label_index_;

  void add_word(std::string_view w);
  void add_char(char32_t c);
  void add_label(std::string_view l);
};

}  // namespace s2b

#endif  // S2B_VOCABULARY_HPP_
