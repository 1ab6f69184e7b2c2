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

#include <stdexcept>
#include <string>

namespace respace {

// Every failure the library reports derives from Error. kind() is a stable
// machine-readable tag; the CLI prints it as the first field of its error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error("shape-mismatch", what) {}
};

struct DegenerateVectorError : Error {
  explicit DegenerateVectorError(const std::string& what)
      : Error("degenerate-vector", what) {}
};

struct DegenerateTextError : Error {
  explicit DegenerateTextError(const std::string& what)
      : Error("degenerate-text", what) {}
};

struct ZeroVarianceError : Error {
  explicit ZeroVarianceError(const std::string& what)
      : Error("zero-variance", what) {}
};

struct NonFiniteError : Error {
  explicit NonFiniteError(const std::string& what) : Error("non-finite", what) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string& what) : Error("format", what) {}
};

struct RangeError : Error {
  explicit RangeError(const std::string& what) : Error("range", what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

struct MissingDataError : Error {
  explicit MissingDataError(const std::string& what)
      : Error("missing-data", what) {}
};

struct DigestMismatchError : Error {
  explicit DigestMismatchError(const std::string& what)
      : Error("digest-mismatch", what) {}
};

struct PhaseMismatchError : Error {
  explicit PhaseMismatchError(const std::string& what)
      : Error("phase-mismatch", what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace respace
