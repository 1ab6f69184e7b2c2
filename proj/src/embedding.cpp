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

#include "respace/embedding.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "respace/errors.hpp"
#include "respace/io.hpp"

namespace respace {

using nlohmann::json;

const char* space_name(Space s) { return s == Space::k2d ? "2d" : "3d"; }

Space parse_space(const std::string& name) {
  if (name == "2d") return Space::k2d;
  if (name == "3d") return Space::k3d;
  throw ConfigError("unknown space '" + name + "' (expected 2d or 3d)");
}

Representation::Representation(Space space_, std::string sample_id_, std::size_t rows_,
                               std::size_t dim_)
    : space(space_), sample_id(std::move(sample_id_)), rows(rows_), dim(dim_), values(rows_ * dim_) {}

std::span<const double> Representation::row(std::size_t k) const {
  if (k >= rows) throw RangeError("representation row " + std::to_string(k) + " out of range");
  return std::span<const double>(values).subspan(k * dim, dim);
}

std::span<double> Representation::row(std::size_t k) {
  if (k >= rows) throw RangeError("representation row " + std::to_string(k) + " out of range");
  return std::span<double>(values).subspan(k * dim, dim);
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z') {
      cur.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      cur.push_back(static_cast<char>(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::vector<double> hash_embed(const std::string& text, std::size_t dim) {
  if (dim == 0) throw ConfigError("hash_embed: dim must be >= 1");
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw DegenerateTextError("hash_embed: text has no tokens");
  std::vector<double> v(dim, 0.0);
  for (const auto& t : tokens) {
    const std::uint64_t h = fnv1a64(t);
    v[h % dim] += (h >> 63) == 0 ? 1.0 : -1.0;
  }
  double norm = 0.0;
  for (double e : v) norm += e * e;
  norm = std::sqrt(norm);
  // Every token contributing to one bucket can cancel out.
  if (!(norm > 0.0)) throw DegenerateTextError("hash_embed: token signs cancel to the zero vector");
  for (double& e : v) e /= norm;
  return v;
}

Representation embed_scene(const GTScene& scene, Space space, const TextEmbedder& embedder) {
  const std::size_t rows = space == Space::k3d ? 1 : static_cast<std::size_t>(scene.cameras);
  std::vector<std::vector<double>> vecs;
  try {
    if (space == Space::k3d) {
      vecs.push_back(embedder.embed(text_serialize_3d(scene)));
    } else {
      for (int c = 0; c < scene.cameras; ++c) vecs.push_back(embedder.embed(text_serialize_2d(scene, c)));
    }
  } catch (const Error& e) {
    throw Error(e.kind(), "sample '" + scene.sample_id + "': " + e.what());
  }
  const std::size_t dim = vecs.front().size();
  Representation rep(space, scene.sample_id, rows, dim);
  rep.source = embedder.source();
  rep.model = embedder.model();
  for (std::size_t k = 0; k < rows; ++k) {
    if (vecs[k].size() != dim) throw ShapeError("sample '" + scene.sample_id + "': ragged embedding rows");
    std::copy(vecs[k].begin(), vecs[k].end(), rep.row(k).begin());
  }
  return rep;
}

EmbeddingMap parse_embeddings_jsonl(const std::string& text) {
  EmbeddingMap out;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "embeddings line " + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(where + ": invalid JSON: " + e.what());
    }
    if (!rec.is_object()) throw FormatError(where + ": expected an object");
    for (const char* f : {"sample_id", "space", "model"}) {
      if (!rec.contains(f) || !rec[f].is_string()) {
        throw FormatError(where + ": field '" + f + "' must be a string");
      }
    }
    if (!rec.contains("vectors") || !rec["vectors"].is_array() || rec["vectors"].empty()) {
      throw FormatError(where + ": field 'vectors' must be a non-empty array");
    }
    const std::string id = rec["sample_id"].get<std::string>();
    const Space space = parse_space(rec["space"].get<std::string>());
    const json& vectors = rec["vectors"];
    if (space == Space::k3d && vectors.size() != 1) {
      throw FormatError(where + ": sample '" + id + "' 3d record must carry exactly one row");
    }
    Representation rep(space, id, vectors.size(), kReSpaceDim);
    rep.model = rec["model"].get<std::string>();
    rep.source = rep.model == HashEmbedder().model() ? "builtin-hash" : "external";
    for (std::size_t k = 0; k < vectors.size(); ++k) {
      const json& row = vectors[k];
      if (!row.is_array() || row.size() != kReSpaceDim) {
        throw FormatError(where + ": sample '" + id + "' row " + std::to_string(k) + " has " +
                          std::to_string(row.is_array() ? row.size() : 0) + " values, expected " +
                          std::to_string(kReSpaceDim));
      }
      auto dst = rep.row(k);
      double norm = 0.0;
      for (std::size_t i = 0; i < kReSpaceDim; ++i) {
        if (!row[i].is_number()) throw FormatError(where + ": sample '" + id + "' non-numeric value");
        dst[i] = row[i].get<double>();
        norm += dst[i] * dst[i];
      }
      if (!(norm > 0.0)) {
        throw DegenerateVectorError(where + ": sample '" + id + "' row " + std::to_string(k) +
                                    " has zero norm");
      }
    }
    if (!out.emplace(EmbeddingKey{id, space}, std::move(rep)).second) {
      throw FormatError(where + ": duplicate record for sample '" + id + "' space " + space_name(space));
    }
  }
  return out;
}

EmbeddingMap load_external_embeddings(const std::filesystem::path& path) {
  return parse_embeddings_jsonl(read_text_file(path));
}

std::string embeddings_to_jsonl(const std::vector<Representation>& reps) {
  std::string out;
  char buf[32];
  for (const Representation& r : reps) {
    out += "{\"sample_id\":" + json(r.sample_id).dump() + ",\"space\":\"" + space_name(r.space) +
           "\",\"model\":" + json(r.model).dump() + ",\"vectors\":[";
    for (std::size_t k = 0; k < r.rows; ++k) {
      if (k) out += ',';
      out += '[';
      const auto row = r.row(k);
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(row[i])));
        out += buf;
      }
      out += ']';
    }
    out += "]}\n";
  }
  return out;
}

void write_embeddings(const std::filesystem::path& path, const std::vector<Representation>& reps) {
  write_text_file(path, embeddings_to_jsonl(reps));
}

}  // namespace respace
