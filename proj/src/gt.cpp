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

#include "respace/gt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <string>
#include <tuple>

#include <json.hpp>

#include "respace/errors.hpp"
#include "respace/io.hpp"

namespace respace {

using nlohmann::json;

namespace {

[[noreturn]] void range_fail(const std::string& where, const char* field, const std::string& why) {
  throw RangeError(where + ": field '" + field + "' " + why);
}

void check_positive(const std::string& where, const char* field, double v) {
  if (!std::isfinite(v) || !(v > 0.0)) range_fail(where, field, "must be > 0, got " + std::to_string(v));
}

void check_finite(const std::string& where, const char* field, double v) {
  if (!std::isfinite(v)) range_fail(where, field, "must be finite");
}

void check_unit(const std::string& where, const char* field, double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    range_fail(where, field, "must lie in [0,1], got " + std::to_string(v));
  }
}

void validate_scene_at(const GTScene& s, const std::string& where) {
  if (s.sample_id.empty()) range_fail(where, "sample_id", "must be non-empty");
  if (s.cameras < 1) range_fail(where, "cameras", "must be >= 1");
  for (std::size_t i = 0; i < s.boxes3d.size(); ++i) {
    const Box3D& b = s.boxes3d[i];
    const std::string at = where + " boxes3d[" + std::to_string(i) + "]";
    check_finite(at, "x", b.x);
    check_finite(at, "y", b.y);
    check_finite(at, "z", b.z);
    check_positive(at, "l", b.l);
    check_positive(at, "w", b.w);
    check_positive(at, "h", b.h);
    if (!std::isfinite(b.yaw) || !(b.yaw > -std::numbers::pi) || b.yaw > std::numbers::pi) {
      range_fail(at, "yaw", "must lie in (-pi, pi], got " + std::to_string(b.yaw));
    }
    check_finite(at, "vx", b.vx);
    check_finite(at, "vy", b.vy);
    if (b.category.empty()) range_fail(at, "category", "must be non-empty");
  }
  for (std::size_t i = 0; i < s.boxes2d.size(); ++i) {
    const Box2D& b = s.boxes2d[i];
    const std::string at = where + " boxes2d[" + std::to_string(i) + "]";
    if (b.camera_id < 0 || b.camera_id >= s.cameras) {
      range_fail(at, "camera_id", "must lie in [0," + std::to_string(s.cameras) + "), got " +
                                      std::to_string(b.camera_id));
    }
    check_unit(at, "cx", b.cx);
    check_unit(at, "cy", b.cy);
    check_unit(at, "bw", b.bw);
    check_unit(at, "bh", b.bh);
    if (!(b.bw > 0.0)) range_fail(at, "bw", "must be > 0");
    if (!(b.bh > 0.0)) range_fail(at, "bh", "must be > 0");
    if (b.category.empty()) range_fail(at, "category", "must be non-empty");
  }
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + ": expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) throw FormatError(where + ": missing field '" + name + "'");
  return *it;
}

double number(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_number()) throw FormatError(where + ": field '" + name + "' must be a number");
  return v.get<double>();
}

int integer(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_number_integer()) throw FormatError(where + ": field '" + name + "' must be an integer");
  return v.get<int>();
}

std::string string_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_string()) throw FormatError(where + ": field '" + name + "' must be a string");
  return v.get<std::string>();
}

const json& array_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_array()) throw FormatError(where + ": field '" + name + "' must be an array");
  return v;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string header(std::size_t n) { return "There are " + std::to_string(n) + " objects."; }

}  // namespace

void validate_scene(const GTScene& scene) { validate_scene_at(scene, "scene '" + scene.sample_id + "'"); }

std::vector<GTScene> parse_gt_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("GT file is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw FormatError("GT file must be a JSON array of scenes");

  std::vector<GTScene> scenes;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < doc.size(); ++r) {
    const json& rec = doc[r];
    const std::string where = "record " + std::to_string(r);
    GTScene s;
    s.sample_id = string_field(rec, "sample_id", where);
    s.cameras = rec.contains("cameras") ? integer(rec, "cameras", where) : kDefaultCameras;
    const json& b3 = array_field(rec, "boxes3d", where);
    for (std::size_t i = 0; i < b3.size(); ++i) {
      const std::string at = where + " boxes3d[" + std::to_string(i) + "]";
      const json& o = b3[i];
      Box3D b;
      b.x = number(o, "x", at);
      b.y = number(o, "y", at);
      b.z = number(o, "z", at);
      b.l = number(o, "l", at);
      b.w = number(o, "w", at);
      b.h = number(o, "h", at);
      b.yaw = number(o, "yaw", at);
      b.vx = number(o, "vx", at);
      b.vy = number(o, "vy", at);
      b.category = string_field(o, "category", at);
      s.boxes3d.push_back(std::move(b));
    }
    const json& b2 = array_field(rec, "boxes2d", where);
    for (std::size_t i = 0; i < b2.size(); ++i) {
      const std::string at = where + " boxes2d[" + std::to_string(i) + "]";
      const json& o = b2[i];
      Box2D b;
      b.camera_id = integer(o, "camera_id", at);
      b.cx = number(o, "cx", at);
      b.cy = number(o, "cy", at);
      b.bw = number(o, "bw", at);
      b.bh = number(o, "bh", at);
      b.category = string_field(o, "category", at);
      s.boxes2d.push_back(std::move(b));
    }
    validate_scene_at(s, where);
    if (!seen.insert(s.sample_id).second) {
      throw FormatError(where + ": duplicate sample_id '" + s.sample_id + "'");
    }
    scenes.push_back(std::move(s));
  }
  return scenes;
}

std::vector<GTScene> parse_gt_file(const std::filesystem::path& path) {
  return parse_gt_json(read_text_file(path));
}

std::string gt_to_json(const std::vector<GTScene>& scenes) {
  json doc = json::array();
  for (const GTScene& s : scenes) {
    json b3 = json::array(), b2 = json::array();
    for (const Box3D& b : s.boxes3d) {
      b3.push_back({{"x", b.x}, {"y", b.y}, {"z", b.z}, {"l", b.l}, {"w", b.w}, {"h", b.h},
                    {"yaw", b.yaw}, {"vx", b.vx}, {"vy", b.vy}, {"category", b.category}});
    }
    for (const Box2D& b : s.boxes2d) {
      b2.push_back({{"camera_id", b.camera_id}, {"cx", b.cx}, {"cy", b.cy}, {"bw", b.bw},
                    {"bh", b.bh}, {"category", b.category}});
    }
    doc.push_back({{"sample_id", s.sample_id}, {"cameras", s.cameras}, {"boxes3d", b3},
                   {"boxes2d", b2}});
  }
  return doc.dump(1) + "\n";
}

void write_gt_file(const std::filesystem::path& path, const std::vector<GTScene>& scenes) {
  write_text_file(path, gt_to_json(scenes));
}

std::string text_serialize_3d(const GTScene& scene) {
  std::vector<const Box3D*> boxes;
  for (const auto& b : scene.boxes3d) boxes.push_back(&b);
  auto key = [](const Box3D* b) {
    return std::tie(b->category, b->x, b->y, b->z, b->l, b->w, b->h, b->yaw, b->vx, b->vy);
  };
  std::sort(boxes.begin(), boxes.end(), [&](auto* a, auto* b) { return key(a) < key(b); });

  std::string out = header(boxes.size());
  for (const Box3D* b : boxes) {
    out += " " + b->category + " at (" + fixed(b->x, 1) + ", " + fixed(b->y, 1) + ", " +
           fixed(b->z, 1) + "), size (" + fixed(b->l, 1) + ", " + fixed(b->w, 1) + ", " +
           fixed(b->h, 1) + "), yaw " + fixed(b->yaw, 2) + ", velocity (" + fixed(b->vx, 1) +
           ", " + fixed(b->vy, 1) + ").";
  }
  return out;
}

std::string text_serialize_2d(const GTScene& scene, int camera_id) {
  if (camera_id < 0 || camera_id >= scene.cameras) {
    throw RangeError("text_serialize_2d: camera_id " + std::to_string(camera_id) +
                     " out of range [0," + std::to_string(scene.cameras) + ")");
  }
  std::vector<const Box2D*> boxes;
  for (const auto& b : scene.boxes2d) {
    if (b.camera_id == camera_id) boxes.push_back(&b);
  }
  auto key = [](const Box2D* b) { return std::tie(b->category, b->cx, b->cy, b->bw, b->bh); };
  std::sort(boxes.begin(), boxes.end(), [&](auto* a, auto* b) { return key(a) < key(b); });

  std::string out = header(boxes.size());
  for (const Box2D* b : boxes) {
    out += " " + b->category + " at (" + fixed(b->cx, 3) + ", " + fixed(b->cy, 3) + "), size (" +
           fixed(b->bw, 3) + ", " + fixed(b->bh, 3) + ").";
  }
  return out;
}

}  // namespace respace
