// Copyright 2026 The Privsel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small one-dimensional search helpers shared by the library sources.

#ifndef PRIVSEL_SRC_OPTIMIZE_H_
#define PRIVSEL_SRC_OPTIMIZE_H_

#include <cmath>
#include <utility>

namespace privsel::internal {

// Golden-section search for the minimiser of a unimodal function on [lo, hi].
// Returns (argmin, min). The endpoints are considered as well.
template <typename F>
std::pair<double, double> GoldenSectionMinimize(F f, double lo, double hi,
                                                int max_iters = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iters && b - a > 1e-17; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  std::pair<double, double> best =
      fc <= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx < best.second) best = {x, fx};
  }
  return best;
}

}  // namespace privsel::internal

#endif  // PRIVSEL_SRC_OPTIMIZE_H_
