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

#include "privsel/runcount.h"

#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "boost/math/special_functions/gamma.hpp"

namespace privsel {
namespace {

constexpr double kTailTolerance = 1e-12;

// Neumaier's compensated running sum.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// Builds Pr[K <= k] for k = 1, 2, ... until the tail of E[K] is provably below
// kTailTolerance. The pmf is accumulated in log space with the running product
// prod_{l < k} (l + eta) / (l + 1).
std::vector<double> BuildTnbCdf(double eta, double nu, double log_scale) {
  std::vector<double> cdf;
  const double log_q = std::log1p(-nu);
  const double q = 1.0 - nu;
  CompensatedSum total;
  // log of (1 - nu)^k prod_{l=1}^{k-1} (l + eta) / (l + 1); the l = 0 factor
  // eta is folded into log_scale.
  double log_term = log_q;
  for (int64_t k = 1; k <= RunCountDist::kMaxHorizon; ++k) {
    if (k > 1) {
      log_term += log_q;
      if (eta == 0.0) {
        log_term += std::log1p(-1.0 / static_cast<double>(k));
      } else {
        log_term += std::log1p((eta - 1.0) / static_cast<double>(k));
      }
    }
    const double pmf = std::exp(log_scale + log_term);
    total.Add(pmf);
    cdf.push_back(total.value());

    // Successive terms j Pr[j] shrink at least by the factor r for j >= k.
    const double kd = static_cast<double>(k);
    const double r = q * std::max(1.0, (kd + eta) / kd);
    if (r < 1.0 && kd * pmf * r / (1.0 - r) < kTailTolerance) break;
  }
  return cdf;
}

}  // namespace

RunCountDist::RunCountDist(std::variant<PointMass, Tnb> params)
    : params_(params) {
  if (const PointMass* pm = point_mass()) {
    std::vector<double> cdf(pm->k, 0.0);
    cdf.back() = 1.0;
    cdf_ = std::make_shared<const std::vector<double>>(std::move(cdf));
  } else {
    const Tnb& t = *tnb();
    cdf_ = std::make_shared<const std::vector<double>>(
        BuildTnbCdf(t.eta, t.nu, LogTnbScale()));
  }
}

absl::StatusOr<RunCountDist> RunCountDist::FromPointMass(int64_t k) {
  if (k < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("point mass k must be >= 1, got %d", k));
  }
  if (k > kMaxHorizon) {
    return absl::InvalidArgumentError(
        absl::StrFormat("point mass k must be <= %d, got %d", kMaxHorizon, k));
  }
  return RunCountDist(PointMass{k});
}

absl::StatusOr<RunCountDist> RunCountDist::TruncatedNegativeBinomial(
    double eta, double nu) {
  if (!(eta > -1.0) || !std::isfinite(eta)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("eta must be finite and > -1, got %g", eta));
  }
  if (!(nu > 0.0 && nu < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("nu must lie in (0, 1), got %g", nu));
  }
  return RunCountDist(Tnb{eta, nu});
}

double RunCountDist::LogTnbScale() const {
  const Tnb& t = *tnb();
  if (t.eta == 0.0) return -std::log(-std::log(t.nu));
  // eta and nu^-eta - 1 always share a sign.
  return std::log(t.eta / std::expm1(-t.eta * std::log(t.nu)));
}

absl::StatusOr<double> RunCountDist::Pmf(int64_t k) const {
  if (k < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("k must be >= 1, got %d", k));
  }
  return std::exp(LogPmf(k));
}

double RunCountDist::LogPmf(int64_t k) const {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (k < 1) return kNegInf;
  if (const PointMass* pm = point_mass()) return k == pm->k ? 0.0 : kNegInf;
  const Tnb& t = *tnb();
  const double kd = static_cast<double>(k);
  const double base = LogTnbScale() + kd * std::log1p(-t.nu);
  if (t.eta == 0.0) return base - std::log(kd);
  if (k == 1) return base;
  // prod_{l=1}^{k-1} (l + eta) / (l + 1) = Gamma(k + eta) / Gamma(k + 1)
  //                                        / Gamma(1 + eta).
  return base +
         std::log(boost::math::tgamma_delta_ratio(kd + t.eta, 1.0 - t.eta)) -
         std::lgamma(1.0 + t.eta);
}

double RunCountDist::Mean() const {
  if (const PointMass* pm = point_mass()) return static_cast<double>(pm->k);
  return Omega(1.0);
}

double RunCountDist::Omega(double x) const {
  if (const PointMass* pm = point_mass()) {
    return static_cast<double>(pm->k) * std::pow(x, pm->k - 1);
  }
  return std::exp(LogOmega(x));
}

double RunCountDist::LogOmega(double x) const {
  if (const PointMass* pm = point_mass()) {
    if (pm->k == 1) return 0.0;
    return std::log(static_cast<double>(pm->k)) +
           static_cast<double>(pm->k - 1) * std::log(x);
  }
  const Tnb& t = *tnb();
  const double u = t.nu + (1.0 - t.nu) * (1.0 - x);
  return LogTnbScale() + std::log1p(-t.nu) - (t.eta + 1.0) * std::log(u);
}

double RunCountDist::LogOmegaRatio(double a, double one_minus_b) const {
  if (const PointMass* pm = point_mass()) {
    if (pm->k == 1 || (a == 1.0 && one_minus_b == 1.0)) return 0.0;
    return static_cast<double>(pm->k - 1) *
           (std::log1p(-a) - std::log1p(-one_minus_b));
  }
  const Tnb& t = *tnb();
  return (t.eta + 1.0) * (std::log(t.nu + (1.0 - t.nu) * one_minus_b) -
                          std::log(t.nu + (1.0 - t.nu) * a));
}

double RunCountDist::Pgf(double x) const {
  if (const PointMass* pm = point_mass()) return std::pow(x, pm->k);
  const Tnb& t = *tnb();
  const double u = t.nu + (1.0 - t.nu) * (1.0 - x);
  if (t.eta == 0.0) return std::log(u) / std::log(t.nu);
  return std::expm1(-t.eta * std::log(u)) / std::expm1(-t.eta * std::log(t.nu));
}

double RunCountDist::PgfIncrement(double tail, double mass) const {
  if (mass <= 0.0) return 0.0;
  if (const PointMass* pm = point_mass()) {
    const double x = 1.0 - tail;
    const double y = x - mass;
    if (y <= 0.0) return std::pow(x, pm->k);
    return std::pow(y, pm->k) *
           std::expm1(static_cast<double>(pm->k) * std::log1p(mass / y));
  }
  const Tnb& t = *tnb();
  const double v = t.nu + (1.0 - t.nu) * (tail + mass);
  const double log_ratio = std::log1p(-(1.0 - t.nu) * mass / v);
  if (t.eta == 0.0) return log_ratio / std::log(t.nu);
  return std::exp(-t.eta * std::log(v)) * std::expm1(-t.eta * log_ratio) /
         std::expm1(-t.eta * std::log(t.nu));
}

double RunCountDist::OmegaSeries(double x) const {
  if (point_mass() != nullptr) return Omega(x);
  CompensatedSum sum;
  const int64_t horizon = truncation_horizon();
  for (int64_t k = 1; k <= horizon; ++k) {
    const double log_power =
        k == 1 ? 0.0 : static_cast<double>(k - 1) * std::log(x);
    sum.Add(std::exp(std::log(static_cast<double>(k)) + LogPmf(k) + log_power));
  }
  return sum.value();
}

double RunCountDist::PgfSeries(double x) const {
  if (point_mass() != nullptr) return Pgf(x);
  CompensatedSum sum;
  const int64_t horizon = truncation_horizon();
  for (int64_t k = 1; k <= horizon; ++k) {
    sum.Add(std::exp(LogPmf(k) + static_cast<double>(k) * std::log(x)));
  }
  return sum.value();
}

std::string RunCountDist::DebugString() const {
  if (const PointMass* pm = point_mass()) {
    return absl::StrFormat("pointmass:k=%d", pm->k);
  }
  return absl::StrFormat("tnb:eta=%g,nu=%g", tnb()->eta, tnb()->nu);
}

}  // namespace privsel
