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
#include <vector>

#include "respace/embedding.hpp"
#include "respace/feature_map.hpp"

namespace respace {

// On-disk feature dataset: a directory holding manifest.json and one
// phase_<p>.bifm file per phase.
//
// phase file, little-endian:
//   "BIFM" | u16 version | u32 record count |
//   records: u16 id length | UTF-8 id | u8 ndim | ndim x u32 dims | f32 payload
//
// Values are stored as f32 and widened to f64 on load.
inline constexpr std::uint16_t kFeatureFormatVersion = 1;

struct FeatureDataset {
  std::string module_tag;
  Space space = Space::k3d;
  Shape shape;
  std::vector<int> phases;
  std::vector<std::string> sample_ids;
  std::vector<FeatureMap> maps;  // ordered by (phase, position in sample_ids)

  // Validates shape/space agreement and that every phase holds exactly one
  // map per sample id.
  static FeatureDataset from_maps(std::string module_tag, Space space, std::vector<FeatureMap> maps);
};

std::filesystem::path phase_file_name(int phase);

std::string encode_phase_file(const std::vector<const FeatureMap*>& maps);
std::vector<FeatureMap> decode_phase_file(const std::string& bytes, int phase,
                                          const std::string& module_tag, const std::string& context);

void write_feature_dataset(const std::filesystem::path& dir, const FeatureDataset& dataset);
FeatureDataset read_feature_dataset(const std::filesystem::path& dir);

}  // namespace respace
