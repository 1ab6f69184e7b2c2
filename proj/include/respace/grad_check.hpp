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
#include <functional>
#include <span>
#include <vector>

namespace respace {

class Rng;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_coordinate = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t coordinates_checked = 0;
};

// Relative error |a - n| / max(|a|, |n|, kGradCheckFloor).
inline constexpr double kGradCheckFloor = 1e-7;

double relative_error(double analytic, double numeric);

// Compares `analytic` (the claimed gradient of f at `point`) with central
// differences (f(p + h e_i) - f(p - h e_i)) / 2h over `coordinates`.
// Throws NonFiniteError if f or the analytic gradient is non-finite.
GradCheckResult grad_check(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> point, std::span<const double> analytic,
                           std::span<const std::size_t> coordinates, double step = 1e-5);

// All coordinates when n <= count, otherwise `count` distinct coordinates
// drawn without replacement, sorted.
std::vector<std::size_t> pick_coordinates(std::size_t n, std::size_t count, Rng& rng);

}  // namespace respace
