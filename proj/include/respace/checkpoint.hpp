// Copyright 2026 The respace Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "respace/autoencoder.hpp"

namespace respace {

// Binary checkpoint, little-endian:
//   "AECK" | u16 version | u64 config digest |
//   u32 config length | canonical config JSON |
//   u32 layer count | per layer (encoder then decoder):
//     u64 weight count | f64 weights | u64 bias count | f64 biases
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  AEConfig config;
  AEParams params;
  std::uint64_t digest = 0;
};

std::string encode_checkpoint(const AEConfig& config, const AEParams& params);
Checkpoint decode_checkpoint(const std::string& bytes, const std::string& context = "checkpoint");

void write_checkpoint(const std::filesystem::path& path, const AEConfig& config, const AEParams& params);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace respace
