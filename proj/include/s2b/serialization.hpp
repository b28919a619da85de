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

// Binary model container.
//
// Layout (little-endian):
//   "S2BS"  u32 version
//   u32 n, n x (string key, i64 value)          architecture
//   3 x (u32 n, n x string)                       word, char, label tables
//   u32 n, n x (string name, u32 rank, rank x u64 extent, f64 values row-major)
// Strings are u32 byte length followed by UTF-8 bytes.

#ifndef S2B_SERIALIZATION_HPP_
#define S2B_SERIALIZATION_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "s2b/corpus.hpp"
#include "s2b/model.hpp"

namespace s2b {

inline constexpr char kModelMagic[4] = {'S', '2', 'B', 'S'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_model(std::ostream& out, const Model<double>& model);
// Throws FormatError on a bad magic, unsupported version, truncated data or
// tensors inconsistent with the stored architecture.
Model<double> read_model(std::istream& in);

void save_model(const Model<double>& model, const std::filesystem::path& path);
Model<double> load_model(const std::filesystem::path& path);

}  // namespace s2b

#endif  // S2B_SERIALIZATION_HPP_
