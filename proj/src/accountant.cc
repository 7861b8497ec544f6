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

#include "privsel/accountant.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "optimize.h"

namespace privsel {
namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr int kUniformCells = 10'000;

// Candidate maximisers of the log-ratio: a uniform grid plus points clustered
// at both ends, where Gaussian curves are steepest.
std::vector<double> LogRatioGrid() {
  std::vector<double> grid;
  grid.reserve(kUniformCells + 400);
  for (int i = 0; i <= kUniformCells; ++i) {
    grid.push_back(static_cast<double>(i) / kUniformCells);
  }
  for (int j = -160; j < -40; ++j) {
    const double t = std::pow(10.0, j / 10.0);
    grid.push_back(t);
    grid.push_back(1.0 - t);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

absl::Status CheckDeltaH(double delta_h) {
  if (!(delta_h > 0.0 && delta_h < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta_h must lie in (0, 1), got %g", delta_h));
  }
  return absl::OkStatus();
}

double LogSumExp(const std::vector<double>& terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

}  // namespace

absl::string_view BoundMethodName(BoundMethod method) {
  switch (method) {
    case BoundMethod::kFdpOurs:
      return "FDP_OURS";
    case BoundMethod::kRdpPrior:
      return "RDP_PRIOR";
  }
  return "UNKNOWN";
}

LogRatioMax MaxLogOmegaRatio(const TradeoffCurve& curve,
                             const RunCountDist& dist) {
  auto h = [&](double a) {
    const double value = dist.LogOmegaRatio(a, curve.Complement(a));
    return std::isnan(value) ? -kInfinity : value;
  };
  static const std::vector<double>* const kGrid =
      new std::vector<double>(LogRatioGrid());
  const std::vector<double>& grid = *kGrid;

  size_t best = 0;
  double best_value = h(grid[0]);
  for (size_t i = 1; i < grid.size(); ++i) {
    const double value = h(grid[i]);
    if (value > best_value) {
      best = i;
      best_value = value;
    }
  }
  LogRatioMax result{best_value, grid[best]};
  if (std::isfinite(best_value)) {
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    const auto [arg, neg] = internal::GoldenSectionMinimize(
        [&](double a) { return -h(a); }, lo, hi);
    if (-neg > result.value) result = {-neg, arg};
  }
  // a = 0 always gives a ratio of at least 1.
  result.value = std::max(result.value, 0.0);
  return result;
}

absl::StatusOr<AccountantReport> SelectEpsilonFdp(const TradeoffCurve& curve,
                                                  const RunCountDist& dist,
                                                  double delta_h) {
  if (absl::Status s = CheckDeltaH(delta_h); !s.ok()) return s;
  const double omega_one = dist.Omega(1.0);
  const double delta = delta_h / omega_one;
  if (!(delta <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta_h / omega(1) = %g exceeds 1", delta));
  }
  absl::StatusOr<double> eps_base = FdpToEpsDelta(curve, delta);
  if (!eps_base.ok()) return eps_base.status();

  AccountantReport report;
  report.method = BoundMethod::kFdpOurs;
  report.delta_h = delta_h;
  report.eps_base = *eps_base;
  const LogRatioMax ratio = MaxLogOmegaRatio(curve, dist);
  report.log_ratio = ratio.value;
  report.argmax_a = ratio.argmax_a;
  report.eps_h = report.eps_base + report.log_ratio;
  return report;
}

std::vector<double> DefaultRdpOrders() {
  std::vector<double> orders;
  for (int i = 11; i < 20; ++i) orders.push_back(i / 10.0);
  for (int a = 2; a <= 512; ++a) orders.push_back(a);
  return orders;
}

absl::StatusOr<double> RdpToEpsilon(double gamma, double alpha, double delta,
                                    RdpConversion conversion) {
  if (!(alpha > 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("alpha must be > 1, got %g", alpha));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g", delta));
  }
  if (conversion == RdpConversion::kClassic) {
    return gamma + std::log(1.0 / delta) / (alpha - 1.0);
  }
  const double eps = gamma + std::log1p(-1.0 / alpha) -
                     (std::log(delta) + std::log(alpha)) / (alpha - 1.0);
  return std::max(eps, 0.0);
}

absl::StatusOr<double> GaussianRdp(const DpSgdConfig& config, double alpha) {
  if (absl::Status s = ValidateDpSgdConfig(config); !s.ok()) return s;
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("alpha must be finite and > 1, got %g", alpha));
  }
  const double n = static_cast<double>(config.n_iters);
  const double inv_two_var = 1.0 / (2.0 * config.sigma * config.sigma);
  if (config.tau == 1.0) return n * alpha * inv_two_var;
  if (alpha != std::floor(alpha)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "subsampled Gaussian RDP needs an integer order, got %g", alpha));
  }
  const int order = static_cast<int>(alpha);
  const double log_tau = std::log(config.tau);
  const double log_keep = std::log1p(-config.tau);
  std::vector<double> terms;
  terms.reserve(order + 1);
  for (int j = 0; j <= order; ++j) {
    const double log_binom = std::lgamma(alpha + 1.0) - std::lgamma(j + 1.0) -
                             std::lgamma(alpha - j + 1.0);
    terms.push_back(log_binom + (order - j) * log_keep + j * log_tau +
                    j * (j - 1.0) * inv_two_var);
  }
  return n * LogSumExp(terms) / (alpha - 1.0);
}

absl::StatusOr<RdpEpsilon> DpSgdEpsilon(const DpSgdConfig& config, double delta,
                                        const RdpOptions& options) {
  if (absl::Status s = ValidateDpSgdConfig(config); !s.ok()) return s;
  RdpEpsilon best{kInfinity, 0.0};
  for (double alpha : options.orders) {
    absl::StatusOr<double> gamma = GaussianRdp(config, alpha);
    if (!gamma.ok()) continue;
    absl::StatusOr<double> eps =
        RdpToEpsilon(*gamma, alpha, delta, options.conversion);
    if (!eps.ok()) return eps.status();
    if (*eps < best.epsilon) best = {*eps, alpha};
  }
  if (!std::isfinite(best.epsilon)) {
    return absl::InvalidArgumentError(
        "no order in the grid gives a finite DP-SGD epsilon");
  }
  return best;
}

absl::StatusOr<double> CalibrateNoiseMultiplier(double target_epsilon,
                                                double tau, int64_t n_iters,
                                                double delta,
                                                const RdpOptions& options) {
  if (!(target_epsilon > 0.0) || !std::isfinite(target_epsilon)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "target epsilon must be finite and > 0, got %g", target_epsilon));
  }
  auto eps_at = [&](double sigma) -> absl::StatusOr<double> {
    absl::StatusOr<DpSgdConfig> config =
        DpSgdConfig::Create(sigma, tau, n_iters);
    if (!config.ok()) return config.status();
    absl::StatusOr<RdpEpsilon> eps = DpSgdEpsilon(*config, delta, options);
    if (!eps.ok()) return eps.status();
    return eps->epsilon;
  };
  // Epsilon decreases in sigma; bracket in log space.
  double lo = 1e-2;
  double hi = 1e6;
  absl::StatusOr<double> eps_lo = eps_at(lo);
  absl::StatusOr<double> eps_hi = eps_at(hi);
  if (!eps_lo.ok()) return eps_lo.status();
  if (!eps_hi.ok()) return eps_hi.status();
  if (*eps_lo < target_epsilon || *eps_hi > target_epsilon) {
    return absl::OutOfRangeError(absl::StrFormat(
        "target epsilon %g is not reached for sigma in [%g, %g]",
        target_epsilon, lo, hi));
  }
  double log_lo = std::log(lo);
  double log_hi = std::log(hi);
  for (int i = 0; i < 200 && log_hi - log_lo > 1e-13; ++i) {
    const double mid = 0.5 * (log_lo + log_hi);
    absl::StatusOr<double> eps = eps_at(std::exp(mid));
    if (!eps.ok()) return eps.status();
    (*eps > target_epsilon ? log_lo : log_hi) = mid;
  }
  return std::exp(log_hi);
}

double TnbSelectionRdp(double gamma_alpha, double gamma_alpha_prime,
                       double alpha, double alpha_prime, double eta, double nu,
                       double mean) {
  return gamma_alpha +
         (1.0 + eta) * (1.0 - 1.0 / alpha_prime) * gamma_alpha_prime +
         (1.0 + eta) * std::log(1.0 / nu) / alpha_prime +
         std::log(mean) / (alpha - 1.0);
}

absl::StatusOr<AccountantReport> SelectEpsilonRdp(const RdpCurve& base,
                                                  const RunCountDist& dist,
                                                  double delta_h,
                                                  const RdpOptions& options) {
  if (absl::Status s = CheckDeltaH(delta_h); !s.ok()) return s;
  const RunCountDist::Tnb* tnb = dist.tnb();
  if (tnb == nullptr) {
    return absl::InvalidArgumentError(
        "the RDP selection bound needs a truncated negative binomial run "
        "count");
  }
  const double mean = dist.Mean();

  std::vector<double> orders;
  std::vector<double> gammas;
  for (double alpha : options.orders) {
    if (!(alpha > 1.0)) continue;
    absl::StatusOr<double> gamma = base(alpha);
    if (!gamma.ok() || !std::isfinite(*gamma)) continue;
    orders.push_back(alpha);
    gammas.push_back(*gamma);
  }

  AccountantReport report;
  report.method = BoundMethod::kRdpPrior;
  report.delta_h = delta_h;
  report.eps_h = kInfinity;
  for (size_t i = 0; i < orders.size(); ++i) {
    for (size_t j = 0; j < orders.size(); ++j) {
      const double gamma_hat = TnbSelectionRdp(
          gammas[i], gammas[j], orders[i], orders[j], tnb->eta, tnb->nu, mean);
      absl::StatusOr<double> eps =
          RdpToEpsilon(gamma_hat, orders[i], delta_h, options.conversion);
      if (!eps.ok()) return eps.status();
      if (*eps < report.eps_h) {
        report.eps_h = *eps;
        report.alpha = orders[i];
        report.alpha_prime = orders[j];
      }
    }
  }
  if (!std::isfinite(report.eps_h)) {
    return absl::OutOfRangeError(
        "unbounded: no pair of orders in the grid gives a finite bound");
  }
  return report;
}

absl::StatusOr<AccountantReport> SelectEpsilonRdp(const DpSgdConfig& config,
                                                  const RunCountDist& dist,
                                                  double delta_h,
                                                  const RdpOptions& options) {
  if (absl::Status s = ValidateDpSgdConfig(config); !s.ok()) return s;
  return SelectEpsilonRdp(
      [&config](double alpha) { return GaussianRdp(config, alpha); }, dist,
      delta_h, options);
}

absl::StatusOr<BoundComparison> CompareBounds(const DpSgdConfig& config,
                                              const RunCountDist& dist,
                                              double delta_h,
                                              const RdpOptions& options) {
  BoundComparison row;
  absl::StatusOr<RdpEpsilon> base = DpSgdEpsilon(config, delta_h, options);
  if (!base.ok()) return base.status();
  row.eps_base = base->epsilon;
  absl::StatusOr<double> mu = DpSgdMu(config);
  if (!mu.ok()) return mu.status();
  row.mu = *mu;
  absl::StatusOr<TradeoffCurve> curve = TradeoffCurve::FromGaussian(*mu);
  if (!curve.ok()) return curve.status();
  absl::StatusOr<AccountantReport> ours =
      SelectEpsilonFdp(*curve, dist, delta_h);
  if (!ours.ok()) return ours.status();
  row.ours = *ours;
  if (dist.tnb() == nullptr) return row;
  absl::StatusOr<AccountantReport> prior =
      SelectEpsilonRdp(config, dist, delta_h, options);
  if (!prior.ok()) return prior.status();
  row.prior = *prior;
  return row;
}

}  // namespace privsel
