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

// Corpus ingestion: CoNLL-style column files with blank-line sentence
// boundaries, token in the first column and label in the last.

#ifndef S2B_CORPUS_HPP_
#define S2B_CORPUS_HPP_

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace s2b {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;  // empty for unlabelled input

  std::size_t size() const { return tokens.size(); }
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::string source;

  std::size_t size() const { return sentences.size(); }
  std::size_t token_count() const;
};

enum class ColumnPolicy {
  kTokenAndLabel,  // first column token, last column label; middle columns ignored
  kTokenOnly,      // first column token; other columns ignored; may be empty
};

// One block per sentence, one row per line, one string per column.
using ColumnBlocks = std::vector<std::vector<std::vector<std::string>>>;

// Splits a stream into sentence blocks. Columns are separated by runs of tabs
// or spaces. Throws FormatError if rows of one sentence disagree on column count.
ColumnBlocks read_column_blocks(std::istream& in, std::string_view source = {});

Corpus parse_conll(std::istream& in, ColumnPolicy policy = ColumnPolicy::kTokenAndLabel,
                   std::string source = {});
Corpus read_conll(const std::filesystem::path& path,
                  ColumnPolicy policy = ColumnPolicy::kTokenAndLabel);

// Writes token<TAB>label lines (token only when unlabelled), blank line after
// each sentence.
void write_conll(std::ostream& out, const Corpus& corpus);

// Splits a UTF-8 string into Unicode scalar values. Malformed sequences decode
// to U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(char32_t scalar);

}  // namespace s2b

#endif  // S2B_CORPUS_HPP_
