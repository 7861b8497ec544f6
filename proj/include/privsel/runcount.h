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

// Run-count distributions for the private selection protocol: the number of
// times k the base algorithm is run before the best run is released.

#ifndef PRIVSEL_RUNCOUNT_H_
#define PRIVSEL_RUNCOUNT_H_

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "privsel/rng.h"

namespace privsel {

class RunCountDist {
 public:
  // k is deterministic.
  struct PointMass {
    int64_t k;
  };
  // Truncated negative binomial with shape eta > -1 and parameter nu in
  // (0, 1). eta == 1 is the geometric distribution nu (1 - nu)^(k - 1) and
  // eta == 0 the logarithmic distribution.
  struct Tnb {
    double eta;
    double nu;
  };

  // Largest supported truncation horizon.
  static constexpr int64_t kMaxHorizon = 10'000'000;

  static absl::StatusOr<RunCountDist> FromPointMass(int64_t k);
  static absl::StatusOr<RunCountDist> TruncatedNegativeBinomial(double eta,
                                                                double nu);
  static absl::StatusOr<RunCountDist> Geometric(double nu) {
    return TruncatedNegativeBinomial(1.0, nu);
  }

  bool is_point_mass() const {
    return std::holds_alternative<PointMass>(params_);
  }
  const PointMass* point_mass() const {
    return std::get_if<PointMass>(&params_);
  }
  const Tnb* tnb() const { return std::get_if<Tnb>(&params_); }

  // Pr[K = k]; InvalidArgument for k < 1.
  absl::StatusOr<double> Pmf(int64_t k) const;
  // log Pr[K = k] for k >= 1 (-infinity outside the support).
  double LogPmf(int64_t k) const;

  // E[K], which also equals Omega(1).
  double Mean() const;

  // omega(x) = sum_k k Pr[k] x^(k - 1), the derivative of the probability
  // generating function, evaluated in closed form. `x` in [0, 1].
  double Omega(double x) const;
  double LogOmega(double x) const;

  // log omega(1 - a) - log omega(b), with b passed through its complement
  // `one_minus_b` so that values of b near 1 keep full precision.
  double LogOmegaRatio(double a, double one_minus_b) const;

  // Probability generating function E[x^K] in closed form.
  double Pgf(double x) const;

  // Pgf(1 - tail) - Pgf(1 - tail - mass) without cancellation. Used for the
  // probability that the maximum of K draws lands in a group of probability
  // `mass` with total probability `tail` strictly above it.
  double PgfIncrement(double tail, double mass) const;

  // Truncated power series over k <= truncation_horizon(). Used to cross-check
  // the closed forms.
  double OmegaSeries(double x) const;
  double PgfSeries(double x) const;

  // Number of support points kept in the cumulative table. Both the
  // probability tail and the tail of E[K] beyond it are below 1e-12 unless the
  // horizon hit kMaxHorizon.
  int64_t truncation_horizon() const {
    return static_cast<int64_t>(cdf_->size());
  }

  // Draws k by inverting the cumulative table.
  template <typename URBG>
  int64_t Sample(URBG& gen) const {
    if (const PointMass* pm = point_mass()) return pm->k;
    const double u = UniformOpen01(gen);
    const std::vector<double>& cdf = *cdf_;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) return static_cast<int64_t>(cdf.size());
    return static_cast<int64_t>(it - cdf.begin()) + 1;
  }

  std::string DebugString() const;

 private:
  explicit RunCountDist(std::variant<PointMass, Tnb> params);

  // log of eta / (nu^-eta - 1) (or 1 / log(1/nu) when eta == 0), the positive
  // normalizing constant of the TNB family.
  double LogTnbScale() const;

  std::variant<PointMass, Tnb> params_;
  // Shared immutable cumulative distribution, cdf[k - 1] = Pr[K <= k].
  std::shared_ptr<const std::vector<double>> cdf_;
};

}  // namespace privsel

#endif  // PRIVSEL_RUNCOUNT_H_
