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

#include "respace/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "respace/bytes.hpp"
#include "respace/errors.hpp"
#include "respace/io.hpp"

namespace respace {

using nlohmann::json;

namespace {

constexpr char kPhaseMagic[4] = {'B', 'I', 'F', 'M'};

}  // namespace

FeatureDataset FeatureDataset::from_maps(std::string module_tag, Space space, std::vector<FeatureMap> maps) {
  if (maps.empty()) throw MissingDataError("feature dataset is empty");
  FeatureDataset ds;
  ds.module_tag = std::move(module_tag);
  ds.space = space;
  ds.shape = maps.front().features.shape();
  const std::size_t want_ndim = space == Space::k2d ? 4 : 3;
  if (ds.shape.size() != want_ndim) {
    throw ShapeError(std::string("space ") + space_name(space) + " expects " +
                     std::to_string(want_ndim) + "-axis features, got " + shape_to_string(ds.shape));
  }
  std::map<int, std::set<std::string>> by_phase;
  std::vector<std::string> ids;
  for (const auto& m : maps) {
    if (m.features.shape() != ds.shape) {
      throw ShapeError("sample '" + m.sample_id + "' phase " + std::to_string(m.phase) + ": shape " +
                       shape_to_string(m.features.shape()) + " differs from " + shape_to_string(ds.shape));
    }
    if (!by_phase[m.phase].insert(m.sample_id).second) {
      throw FormatError("duplicate feature map for sample '" + m.sample_id + "' phase " +
                        std::to_string(m.phase));
    }
    if (std::find(ids.begin(), ids.end(), m.sample_id) == ids.end()) ids.push_back(m.sample_id);
  }
  const std::set<std::string> all(ids.begin(), ids.end());
  for (const auto& [phase, present] : by_phase) {
    if (present != all) {
      throw MissingDataError("phase " + std::to_string(phase) + " covers " +
                             std::to_string(present.size()) + " of " + std::to_string(all.size()) +
                             " samples");
    }
    ds.phases.push_back(phase);
  }
  ds.sample_ids = ids;
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos[ids[i]] = i;
  std::stable_sort(maps.begin(), maps.end(), [&](const FeatureMap& a, const FeatureMap& b) {
    return std::pair(a.phase, pos[a.sample_id]) < std::pair(b.phase, pos[b.sample_id]);
  });
  ds.maps = std::move(maps);
  return ds;
}

std::filesystem::path phase_file_name(int phase) {
  return "phase_" + std::to_string(phase) + ".bifm";
}

std::string encode_phase_file(const std::vector<const FeatureMap*>& maps) {
  ByteWriter w;
  w.bytes(std::string_view(kPhaseMagic, 4));
  w.u16(kFeatureFormatVersion);
  w.u32(static_cast<std::uint32_t>(maps.size()));
  for (const FeatureMap* m : maps) {
    if (m->sample_id.size() > 0xffff) throw FormatError("sample id longer than 65535 bytes");
    w.u16(static_cast<std::uint16_t>(m->sample_id.size()));
    w.bytes(m->sample_id);
    const Shape& s = m->features.shape();
    if (s.size() > 0xff) throw FormatError("too many tensor axes");
    w.u8(static_cast<std::uint8_t>(s.size()));
    for (auto d : s) w.u32(static_cast<std::uint32_t>(d));
    for (double v : m->features.data()) w.f32(static_cast<float>(v));
  }
  return w.str();
}

std::vector<FeatureMap> decode_phase_file(const std::string& bytes, int phase,
                                          const std::string& module_tag, const std::string& context) {
  ByteReader r(bytes, context);
  if (r.bytes(4) != std::string_view(kPhaseMagic, 4)) throw FormatError(context + ": bad magic");
  const auto version = r.u16();
  if (version != kFeatureFormatVersion) {
    throw FormatError(context + ": unsupported version " + std::to_string(version));
  }
  const auto count = r.u32();
  std::vector<FeatureMap> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    FeatureMap m;
    m.phase = phase;
    m.module_tag = module_tag;
    m.sample_id = std::string(r.bytes(r.u16()));
    const auto ndim = r.u8();
    if (ndim == 0) throw FormatError(context + ": record " + std::to_string(i) + " has no axes");
    Shape shape;
    for (std::uint8_t k = 0; k < ndim; ++k) shape.push_back(r.u32());
    const std::size_t n = shape_numel(shape);
    if (n == 0 || n > r.remaining() / 4) {
      throw FormatError(context + ": record " + std::to_string(i) + " payload size invalid");
    }
    std::vector<double> values(n);
    for (auto& v : values) v = static_cast<double>(r.f32());
    m.features = Tensor(std::move(shape), std::move(values));
    out.push_back(std::move(m));
  }
  if (r.remaining() != 0) throw FormatError(context + ": trailing bytes");
  return out;
}

void write_feature_dataset(const std::filesystem::path& dir, const FeatureDataset& ds) {
  std::filesystem::create_directories(dir);
  const json manifest{{"version", kFeatureFormatVersion},
                      {"module_tag", ds.module_tag},
                      {"space", space_name(ds.space)},
                      {"shape", ds.shape},
                      {"phases", ds.phases},
                      {"sample_ids", ds.sample_ids}};
  write_text_file(dir / "manifest.json", manifest.dump(1) + "\n");
  for (int phase : ds.phases) {
    std::vector<const FeatureMap*> maps;
    for (const auto& m : ds.maps) {
      if (m.phase == phase) maps.push_back(&m);
    }
    write_text_file(dir / phase_file_name(phase), encode_phase_file(maps));
  }
}

FeatureDataset read_feature_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  json manifest;
  try {
    manifest = json::parse(read_text_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  FeatureDataset declared;
  try {
    const auto version = manifest.at("version").get<int>();
    if (version != kFeatureFormatVersion) {
      throw FormatError(manifest_path.string() + ": unsupported version " + std::to_string(version));
    }
    declared.module_tag = manifest.at("module_tag").get<std::string>();
    declared.space = parse_space(manifest.at("space").get<std::string>());
    declared.shape = manifest.at("shape").get<Shape>();
    declared.phases = manifest.at("phases").get<std::vector<int>>();
    declared.sample_ids = manifest.at("sample_ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  std::vector<FeatureMap> maps;
  for (int phase : declared.phases) {
    const auto path = dir / phase_file_name(phase);
    auto part = decode_phase_file(read_text_file(path), phase, declared.module_tag, path.string());
    for (auto& m : part) maps.push_back(std::move(m));
  }
  FeatureDataset ds = FeatureDataset::from_maps(declared.module_tag, declared.space, std::move(maps));
  if (ds.shape != declared.shape) {
    throw FormatError(manifest_path.string() + ": manifest shape " + shape_to_string(declared.shape) +
                      " disagrees with records " + shape_to_string(ds.shape));
  }
  if (ds.phases != declared.phases) {
    throw FormatError(manifest_path.string() + ": phases disagree with phase files");
  }
  if (ds.sample_ids != declared.sample_ids) {
    throw FormatError(manifest_path.string() + ": sample_ids disagree with phase file records");
  }
  return ds;
}

}  // namespace respace
