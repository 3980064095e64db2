// Copyright 2026 The TCN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef TCN_TOOLS_RUN_CONFIG_HPP_
#define TCN_TOOLS_RUN_CONFIG_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcn::cli {

// Bad configuration value or file; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything a command can be configured with. Sections of the INI file
// mirror the groups below; list values are comma-separated.
struct RunConfig {
  // [paths]
  std::string input;
  std::string train;
  std::string valid;
  std::string test;
  std::string checkpoint;
  std::string output_dir = ".";
  // Applies to `input`; split outputs and the train/valid/test files are
  // 0-based.
  int index_base = 0;
  // Index fields per line; 0 takes the header or the first line's count.
  std::size_t order = 0;

  // [run] root of every named sub-seed.
  std::uint64_t seed = 0;

  // [split]
  std::array<double, 3> ratios{0.7, 0.1, 0.2};

  // [graph]
  bool include_valid = false;

  // [model]
  std::size_t rank = 10;
  int layers = 2;
  bool feature_transform = false;
  bool nonlinearity = false;
  std::string fusion = "concat";
  std::string predictor = "cp";
  std::size_t hidden = 64;
  std::size_t mlp_depth = 2;
  std::size_t channels = 0;

  // [train] learning_rate x weight_decay is the search grid.
  int epochs = 100;
  std::size_t batch_size = 256;
  std::vector<double> learning_rates{1e-2};
  std::vector<double> weight_decays{0.0};
  std::size_t negatives = 1;
  int valid_every = 1;
  std::size_t valid_k = 100;
  int checkpoint_every = 0;
  bool audit_negatives = false;

  // [eval]
  std::string candidates = "full";
  std::uint64_t multiplier = 1000;
  std::vector<std::size_t> ks{100};
  int runs = 1;
  bool exclude_valid = true;
  std::uint64_t budget = 1'000'000'000;
  std::size_t threads = 1;

  // [synth]
  std::vector<std::int64_t> dims{20, 20, 20};
  int synth_rank = 3;
  std::uint64_t observations = 400;
  double noise = 0.0;

  bool operator==(const RunConfig&) const = default;
};

// Starts from the defaults above and applies every key in the stream.
// Unknown sections or keys throw ConfigError.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

// Every field, in a form parse_config reads back to an equal RunConfig.
void write_config(const RunConfig& config, std::ostream& out);

// Range checks that do not depend on the command.
void validate(const RunConfig& config);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace tcn::cli

#endif  // TCN_TOOLS_RUN_CONFIG_HPP_
