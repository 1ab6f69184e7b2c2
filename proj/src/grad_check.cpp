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

#include "respace/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "respace/errors.hpp"
#include "respace/rng.hpp"

namespace respace {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> point, std::span<const double> analytic,
                           std::span<const std::size_t> coordinates, double step) {
  if (analytic.size() != point.size()) {
    throw ShapeError("grad_check: gradient length " + std::to_string(analytic.size()) +
                     " != point length " + std::to_string(point.size()));
  }
  std::vector<double> p(point.begin(), point.end());
  GradCheckResult result;
  for (std::size_t i : coordinates) {
    if (i >= p.size()) throw RangeError("grad_check: coordinate out of range");
    const double saved = p[i];
    p[i] = saved + step;
    const double up = f(p);
    p[i] = saved - step;
    const double down = f(p);
    p[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down) || !std::isfinite(analytic[i])) {
      throw NonFiniteError("grad_check: non-finite value at coordinate " + std::to_string(i));
    }
    const double numeric = (up - down) / (2.0 * step);
    const double err = relative_error(analytic[i], numeric);
    if (err > result.max_rel_error || result.coordinates_checked == 0) {
      result.max_rel_error = err;
      result.worst_coordinate = i;
      result.analytic_at_worst = analytic[i];
      result.numeric_at_worst = numeric;
    }
    ++result.coordinates_checked;
  }
  return result;
}

std::vector<std::size_t> pick_coordinates(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (n <= count) return all;
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(all[i], all[i + rng.index(n - i)]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace respace
