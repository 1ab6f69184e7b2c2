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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "respace/gt.hpp"

namespace respace {

// Dimension of the shared representation space.
inline constexpr std::size_t kReSpaceDim = 768;

enum class Space { k2d, k3d };

const char* space_name(Space s);
Space parse_space(const std::string& name);

// K row vectors in a common space: K = 1 for the BEV (3d) space, K = number
// of cameras for the perspective (2d) space.
struct Representation {
  Space space = Space::k3d;
  std::string sample_id;
  std::string source;  // "builtin-hash", "external" or "encoder"
  std::string model;
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<double> values;  // rows x dim, row-major

  Representation() = default;
  Representation(Space space, std::string sample_id, std::size_t rows, std::size_t dim);

  std::span<const double> row(std::size_t k) const;
  std::span<double> row(std::size_t k);

  friend bool operator==(const Representation&, const Representation&) = default;
};

// Lowercase ASCII, split on anything that is not [a-z0-9], drop empties.
std::vector<std::string> tokenize(const std::string& text);

// Signed feature hashing: each token's FNV-1a 64 hash picks bucket
// hash % dim and sign (+1 when the top bit is clear); the accumulated
// vector is L2-normalized. Throws DegenerateTextError for token-free text.
std::vector<double> hash_embed(const std::string& text, std::size_t dim = kReSpaceDim);

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual std::vector<double> embed(const std::string& text) const = 0;
  virtual std::string source() const = 0;
  virtual std::string model() const = 0;
};

class HashEmbedder final : public TextEmbedder {
 public:
  explicit HashEmbedder(std::size_t dim = kReSpaceDim) : dim_(dim) {}
  std::vector<double> embed(const std::string& text) const override { return hash_embed(text, dim_); }
  std::string source() const override { return "builtin-hash"; }
  std::string model() const override { return "fnv1a-signed-hash"; }

 private:
  std::size_t dim_;
};

// 3d: one row from text_serialize_3d. 2d: one row per camera from
// text_serialize_2d. Embedder failures are rethrown with the sample id.
Representation embed_scene(const GTScene& scene, Space space, const TextEmbedder& embedder);

using EmbeddingKey = std::pair<std::string, Space>;
using EmbeddingMap = std::map<EmbeddingKey, Representation>;

// JSON Lines interchange: one {"sample_id","space","model","vectors"}
// record per (sample, space), floats printed with 9 significant digits.
EmbeddingMap load_external_embeddings(const std::filesystem::path& path);
EmbeddingMap parse_embeddings_jsonl(const std::string& text);
std::string embeddings_to_jsonl(const std::vector<Representation>& reps);
void write_embeddings(const std::filesystem::path& path, const std::vector<Representation>& reps);

}  // namespace respace
