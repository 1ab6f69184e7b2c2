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

#include "respace/checkpoint.hpp"

#include "respace/bytes.hpp"
#include "respace/errors.hpp"
#include "respace/io.hpp"

namespace respace {

namespace {

constexpr char kMagic[4] = {'A', 'E', 'C', 'K'};

void put_tensor(ByteWriter& w, const Tensor& t) {
  w.u64(t.size());
  for (double v : t.data()) w.f64(v);
}

void get_tensor(ByteReader& r, Tensor& t, const std::string& context) {
  const auto n = r.u64();
  if (n != t.size()) {
    throw FormatError(context + ": blob has " + std::to_string(n) + " values, config expects " +
                      std::to_string(t.size()));
  }
  for (double& v : t.data()) v = r.f64();
}

}  // namespace

std::string encode_checkpoint(const AEConfig& config, const AEParams& params) {
  const std::string cfg = config.to_json().dump();
  ByteWriter w;
  w.bytes(std::string_view(kMagic, 4));
  w.u16(kCheckpointVersion);
  w.u64(config.digest());
  w.u32(static_cast<std::uint32_t>(cfg.size()));
  w.bytes(cfg);
  w.u32(static_cast<std::uint32_t>(params.encoder.size() + params.decoder.size()));
  for (const auto* stack : {&params.encoder, &params.decoder})
    for (const auto& l : *stack) {
      put_tensor(w, l.weight);
      put_tensor(w, l.bias);
    }
  return w.str();
}

Checkpoint decode_checkpoint(const std::string& bytes, const std::string& context) {
  ByteReader r(bytes, context);
  if (r.bytes(4) != std::string_view(kMagic, 4)) throw FormatError(context + ": bad magic");
  const auto version = r.u16();
  if (version != kCheckpointVersion) {
    throw FormatError(context + ": unsupported version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.digest = r.u64();
  const std::string cfg(r.bytes(r.u32()));
  try {
    ck.config = AEConfig::from_json(nlohmann::json::parse(cfg));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(context + ": embedded config is not JSON: " + e.what());
  }
  if (ck.config.digest() != ck.digest) {
    throw DigestMismatchError(context + ": stored digest " + digest_hex(ck.digest) +
                              " does not match embedded config " + digest_hex(ck.config.digest()));
  }
  ck.params = AEParams::zeros_like(init_params(ck.config));
  const auto layers = r.u32();
  if (layers != ck.params.encoder.size() + ck.params.decoder.size()) {
    throw FormatError(context + ": layer count " + std::to_string(layers) + " disagrees with config");
  }
  for (auto* stack : {&ck.params.encoder, &ck.params.decoder})
    for (auto& l : *stack) {
      get_tensor(r, l.weight, context);
      get_tensor(r, l.bias, context);
    }
  if (r.remaining() != 0) throw FormatError(context + ": trailing bytes");
  return ck;
}

void write_checkpoint(const std::filesystem::path& path, const AEConfig& config, const AEParams& params) {
  write_text_file(path, encode_checkpoint(config, params));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_text_file(path), path.string());
}

}  // namespace respace
