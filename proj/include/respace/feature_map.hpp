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

#include <string>

#include "respace/tensor.hpp"

namespace respace {

// One module-output tensor: [C,H,W] for BEV features, [Cam,C,H,W] for
// per-camera image features.
struct FeatureMap {
  std::string sample_id;
  int phase = 0;
  std::string module_tag;
  Tensor features;

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

}  // namespace respace
