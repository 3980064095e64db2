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

#ifndef TCN_CHECKPOINT_HPP_
#define TCN_CHECKPOINT_HPP_

#include <iosfwd>
#include <string>

#include "training.hpp"

namespace tcn {

// Binary little-endian container: magic "TCNCKPT\0", u32 version, the full
// TrainConfig (shape, rank, L, flags, fusion, predictor, seed, ...), the
// epoch log, F^[0], W^[l], predictor blocks, Adam moments and, when present,
// the best-validation model.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const TrainState& state, std::ostream& out);
void save_checkpoint(const TrainState& state, const std::string& path);
TrainState load_checkpoint(std::istream& in);
TrainState load_checkpoint(const std::string& path);

}  // namespace tcn

#endif  // TCN_CHECKPOINT_HPP_
