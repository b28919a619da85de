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

// Command-line front end: train, tag, eval and sigtest subcommands.

#ifndef S2B_CLI_HPP_
#define S2B_CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "s2b/model.hpp"
#include "s2b/training.hpp"

namespace s2b {

// Everything `train` needs: sizes, training settings and paths.
struct RunConfig {
  Architecture arch;
  TrainConfig train;
  std::filesystem::path train_path;
  std::filesystem::path dev_path;
  std::filesystem::path test_path;
  std::filesystem::path model_path;
  std::filesystem::path log_path;
};

// "media": embeddings 200/30/150, char layer 100, other layers 300, SGD with
// momentum, 40 epochs, segments of 10. "wsj": word embeddings 300, layers
// 150, Adam, 52 epochs, length clusters. Throws on an unknown name.
RunConfig profile_defaults(std::string_view profile);

// key=value lines; blank lines and lines starting with '#' are skipped.
// Throws std::invalid_argument on a malformed line or a repeated key.
std::map<std::string, std::string> parse_config_file(std::istream& in);

// Applies one setting by its key (the long flag name without dashes).
// Throws std::invalid_argument for unknown keys or unparsable values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace s2b

#endif  // S2B_CLI_HPP_
