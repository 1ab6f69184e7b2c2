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

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace respace {

// One annotated obstacle in the ego/BEV frame. Positions and sizes in
// meters, yaw in radians within (-pi, pi], velocities in m/s.
struct Box3D {
  double x = 0, y = 0, z = 0;
  double l = 1, w = 1, h = 1;
  double yaw = 0;
  double vx = 0, vy = 0;
  std::string category;

  friend bool operator==(const Box3D&, const Box3D&) = default;
};

// Perspective-view box on one camera, normalized image coordinates.
struct Box2D {
  int camera_id = 0;
  double cx = 0, cy = 0, bw = 0, bh = 0;
  std::string category;

  friend bool operator==(const Box2D&, const Box2D&) = default;
};

inline constexpr int kDefaultCameras = 6;

struct GTScene {
  std::string sample_id;
  int cameras = kDefaultCameras;
  std::vector<Box3D> boxes3d;
  std::vector<Box2D> boxes2d;

  friend bool operator==(const GTScene&, const GTScene&) = default;
};

// Throws RangeError naming the offending field.
void validate_scene(const GTScene& scene);

std::vector<GTScene> parse_gt_json(const std::string& text);
std::vector<GTScene> parse_gt_file(const std::filesystem::path& path);
std::string gt_to_json(const std::vector<GTScene>& scenes);
void write_gt_file(const std::filesystem::path& path, const std::vector<GTScene>& scenes);

// "There are N objects." followed by one clause per box, boxes sorted by
// (category, x, y, ...). One decimal for metric quantities, two for yaw.
std::string text_serialize_3d(const GTScene& scene);

// Same template over the 2D boxes of one camera; three decimals.
std::string text_serialize_2d(const GTScene& scene, int camera_id);

}  // namespace respace
