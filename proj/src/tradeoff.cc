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

#include "privsel/tradeoff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "optimize.h"
#include "privsel/normal.h"

namespace privsel {
namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Search bracket and absolute tolerance for epsilon.
constexpr double kEpsilonUpper = 100.0;
constexpr double kEpsilonTolerance = 1e-10;

// Slack allowed when checking the supporting-line condition numerically.
constexpr double kLineSlack = 4e-16;

absl::Status CheckUnitInterval(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s must lie in [0, 1], got %g", name, value));
  }
  return absl::OkStatus();
}

double GaussianDelta(double mu, double epsilon) {
  if (mu == 0.0) return 0.0;
  const double a = NormalCdf(-epsilon / mu + mu / 2.0);
  const double b = NormalCdf(-epsilon / mu - mu / 2.0);
  const double second = b > 0.0 ? std::exp(epsilon + std::log(b)) : 0.0;
  return std::clamp(a - second, 0.0, 1.0);
}

}  // namespace

absl::StatusOr<DpSgdConfig> DpSgdConfig::Create(double sigma, double tau,
                                                int64_t n_iters) {
  DpSgdConfig config{sigma, tau, n_iters};
  if (absl::Status s = ValidateDpSgdConfig(config); !s.ok()) return s;
  return config;
}

absl::Status ValidateDpSgdConfig(const DpSgdConfig& config) {
  if (!(config.sigma > 0.0) || !std::isfinite(config.sigma)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("sigma must be positive, got %g", config.sigma));
  }
  if (!(config.tau > 0.0 && config.tau <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("tau must lie in (0, 1], got %g", config.tau));
  }
  if (config.n_iters < 1) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "number of iterations must be >= 1, got %d", config.n_iters));
  }
  return absl::OkStatus();
}

absl::StatusOr<TradeoffCurve> TradeoffCurve::FromEpsDelta(double epsilon,
                                                          double delta) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be finite and >= 0, got %g", epsilon));
  }
  if (absl::Status s = CheckUnitInterval(delta, "delta"); !s.ok()) return s;
  return TradeoffCurve(EpsDelta{epsilon, delta});
}

absl::StatusOr<TradeoffCurve> TradeoffCurve::FromGaussian(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("mu must be finite and >= 0, got %g", mu));
  }
  return TradeoffCurve(Gaussian{mu});
}

double TradeoffCurve::operator()(double x) const {
  if (const auto* ed = eps_delta()) {
    const double e = std::exp(ed->epsilon);
    return std::max({0.0, 1.0 - ed->delta - e * x, (1.0 - ed->delta - x) / e});
  }
  const double mu = gaussian()->mu;
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  return NormalCdf(NormalQuantileUpper(x) - mu);
}

double TradeoffCurve::Complement(double x) const {
  if (const auto* ed = eps_delta()) {
    const double e = std::exp(ed->epsilon);
    return std::min({1.0, ed->delta + e * x, 1.0 - (1.0 - ed->delta - x) / e});
  }
  const double mu = gaussian()->mu;
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return NormalSf(NormalQuantileUpper(x) - mu);
}

std::string TradeoffCurve::DebugString() const {
  if (const auto* ed = eps_delta()) {
    return absl::StrFormat("epsdelta(eps=%g, delta=%g)", ed->epsilon,
                           ed->delta);
  }
  return absl::StrFormat("gdp(mu=%g)", gaussian()->mu);
}

absl::StatusOr<double> EvalEpsDeltaCurve(double epsilon, double delta,
                                         double x) {
  if (absl::Status s = CheckUnitInterval(x, "x"); !s.ok()) return s;
  absl::StatusOr<TradeoffCurve> curve =
      TradeoffCurve::FromEpsDelta(epsilon, delta);
  if (!curve.ok()) return curve.status();
  return (*curve)(x);
}

absl::StatusOr<double> EvalGdpCurve(double mu, double x) {
  if (absl::Status s = CheckUnitInterval(x, "x"); !s.ok()) return s;
  absl::StatusOr<TradeoffCurve> curve = TradeoffCurve::FromGaussian(mu);
  if (!curve.ok()) return curve.status();
  return (*curve)(x);
}

absl::StatusOr<double> GenericFdpToEpsDelta(const TradeoffCurve& curve,
                                            double delta) {
  if (absl::Status s = CheckUnitInterval(delta, "delta"); !s.ok()) return s;
  // delta < 1 - f(0), written against the complement to avoid rounding.
  if (delta < curve.Complement(0.0)) return kInfinity;

  // The curve supports (a, delta) iff max_x {1 - f(x) - e^a x} <= delta.
  // Working with the complement keeps the comparison relative to delta.
  const double allowance = std::max(1e-12 * delta, kLineSlack);
  auto supported = [&](double a) {
    const double slope = std::exp(a);
    const double worst =
        -internal::GoldenSectionMinimize(
             [&](double x) { return slope * x - curve.Complement(x); }, 0.0,
             1.0)
             .second;
    return worst <= delta + allowance;
  };
  if (supported(0.0)) return 0.0;
  if (!supported(kEpsilonUpper)) return kInfinity;
  double lo = 0.0;
  double hi = kEpsilonUpper;
  while (hi - lo > kEpsilonTolerance) {
    const double mid = 0.5 * (lo + hi);
    (supported(mid) ? hi : lo) = mid;
  }
  return hi;
}

absl::StatusOr<double> FdpToEpsDelta(const TradeoffCurve& curve, double delta) {
  if (!curve.is_gaussian()) return GenericFdpToEpsDelta(curve, delta);
  if (absl::Status s = CheckUnitInterval(delta, "delta"); !s.ok()) return s;

  const double mu = curve.gaussian()->mu;
  if (mu == 0.0) return 0.0;
  if (GaussianDelta(mu, 0.0) <= delta) return 0.0;
  if (GaussianDelta(mu, kEpsilonUpper) > delta) return kInfinity;
  double lo = 0.0;
  double hi = kEpsilonUpper;
  while (hi - lo > kEpsilonTolerance) {
    const double mid = 0.5 * (lo + hi);
    (GaussianDelta(mu, mid) > delta ? lo : hi) = mid;
  }
  return hi;
}

absl::StatusOr<double> GdpDeltaOfEps(double mu, double epsilon) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("mu must be finite and >= 0, got %g", mu));
  }
  if (!(epsilon >= 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be >= 0, got %g", epsilon));
  }
  return GaussianDelta(mu, epsilon);
}

absl::StatusOr<double> GdpMuFromEpsDelta(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be finite and > 0, got %g", epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g", delta));
  }
  // delta(mu) increases from 0 at mu = 0 to 1 as mu grows.
  constexpr double kMuCap = 1e3;
  double lo = 0.0;
  double hi = 1.0;
  while (GaussianDelta(hi, epsilon) < delta) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMuCap) {
      return absl::InternalError(absl::StrFormat(
          "failed to bracket mu for eps=%g, delta=%g within [0, %g]", epsilon,
          delta, kMuCap));
    }
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (GaussianDelta(mid, epsilon) < delta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

absl::StatusOr<double> GdpApproxMu(const DpSgdConfig& config) {
  if (absl::Status s = ValidateDpSgdConfig(config); !s.ok()) return s;
  const double s = 1.0 / config.sigma;
  const double s2 = s * s;
  if (s2 > 700.0) {
    return absl::OutOfRangeError(absl::StrFormat(
        "sigma=%g is too small: exp(1/sigma^2) overflows", config.sigma));
  }
  // e^{s^2} Phi(1.5 s) + 3 Phi(-0.5 s) - 2 rewritten with erf so that the
  // O(s) terms cancel analytically instead of in floating point.
  const double a = 1.5 * s / std::numbers::sqrt2;
  const double b = 0.5 * s / std::numbers::sqrt2;
  const double inner = 0.5 * std::expm1(s2) + 0.5 * std::exp(s2) * std::erf(a) -
                       1.5 * std::erf(b);
  return std::numbers::sqrt2 * config.tau *
         std::sqrt(static_cast<double>(config.n_iters)) *
         std::sqrt(std::max(0.0, inner));
}

absl::StatusOr<double> DpSgdMu(const DpSgdConfig& config) {
  if (absl::Status s = ValidateDpSgdConfig(config); !s.ok()) return s;
  if (config.tau == 1.0) {
    return std::sqrt(static_cast<double>(config.n_iters)) / config.sigma;
  }
  return GdpApproxMu(config);
}

}  // namespace privsel
