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

// Trade-off functions (f-DP curves) and their conversions to (epsilon, delta).
//
// A trade-off function maps a type I error x in [0, 1] to the smallest
// achievable type II error f(x) when distinguishing the outputs of a mechanism
// on two adjacent datasets. Two families are supported: the piecewise-linear
// curve of (epsilon, delta)-DP and the Gaussian curve G_mu of mu-GDP.

#ifndef PRIVSEL_TRADEOFF_H_
#define PRIVSEL_TRADEOFF_H_

#include <cstdint>
#include <string>
#include <variant>

#include "absl/status/statusor.h"

namespace privsel {

// Privacy parameters of DP-SGD. `sigma` is the noise multiplier (noise
// standard deviation divided by the clipping norm), `tau` the sampling ratio
// and `n_iters` the number of iterations.
struct DpSgdConfig {
  double sigma = 1.0;
  double tau = 1.0;
  int64_t n_iters = 1;

  static absl::StatusOr<DpSgdConfig> Create(double sigma, double tau,
                                            int64_t n_iters);
};

absl::Status ValidateDpSgdConfig(const DpSgdConfig& config);

class TradeoffCurve {
 public:
  struct EpsDelta {
    double epsilon;
    double delta;
  };
  struct Gaussian {
    double mu;
  };

  static absl::StatusOr<TradeoffCurve> FromEpsDelta(double epsilon,
                                                    double delta);
  static absl::StatusOr<TradeoffCurve> FromGaussian(double mu);

  // f(x). `x` must lie in [0, 1].
  double operator()(double x) const;

  // 1 - f(x) without cancellation when f(x) is close to 1.
  double Complement(double x) const;

  bool is_gaussian() const { return std::holds_alternative<Gaussian>(params_); }
  const EpsDelta* eps_delta() const { return std::get_if<EpsDelta>(&params_); }
  const Gaussian* gaussian() const { return std::get_if<Gaussian>(&params_); }

  std::string DebugString() const;

 private:
  explicit TradeoffCurve(std::variant<EpsDelta, Gaussian> params)
      : params_(params) {}

  std::variant<EpsDelta, Gaussian> params_;
};

// max(0, 1 - delta - e^eps x, e^-eps (1 - delta - x)).
absl::StatusOr<double> EvalEpsDeltaCurve(double epsilon, double delta,
                                         double x);

// G_mu(x) = Phi(Phi^-1(1 - x) - mu), exact at both endpoints.
absl::StatusOr<double> EvalGdpCurve(double mu, double x);

// Smallest epsilon >= 0 such that the mechanism is (epsilon, delta)-DP given
// that it is f-DP. Returns +infinity when delta < 1 - f(0). Gaussian curves go
// through the closed form of GdpDeltaOfEps; every other curve uses the generic
// supporting-line search (GenericFdpToEpsDelta).
absl::StatusOr<double> FdpToEpsDelta(const TradeoffCurve& curve, double delta);

// Bisection on epsilon; for each candidate, checks that the line
// 1 - delta - e^a x stays below f by minimising f(x) + e^a x over [0, 1]
// (convex) with golden-section search. Works for any convex symmetric curve.
absl::StatusOr<double> GenericFdpToEpsDelta(const TradeoffCurve& curve,
                                            double delta);

// delta(eps) = Phi(-eps/mu + mu/2) - e^eps Phi(-eps/mu - mu/2): the tight
// (epsilon, delta) profile of mu-GDP. Returns 0 for mu == 0.
absl::StatusOr<double> GdpDeltaOfEps(double mu, double epsilon);

// The mu at which GdpDeltaOfEps(mu, epsilon) == delta.
absl::StatusOr<double> GdpMuFromEpsDelta(double epsilon, double delta);

// Central-limit GDP approximation of Poisson-subsampled DP-SGD:
// mu = sqrt(2) tau sqrt(N) sqrt(e^{1/sigma^2} Phi(1.5/sigma)
//                               + 3 Phi(-0.5/sigma) - 2).
absl::StatusOr<double> GdpApproxMu(const DpSgdConfig& config);

// The GDP parameter used to model a DP-SGD run. With full-batch updates
// (tau == 1) the run is a composition of N Gaussian mechanisms, which is
// exactly sqrt(N)/sigma-GDP; otherwise the central-limit approximation above.
absl::StatusOr<double> DpSgdMu(const DpSgdConfig& config);

}  // namespace privsel

#endif  // PRIVSEL_TRADEOFF_H_
