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

// Privacy upper bounds for the private selection protocol: run a base
// mechanism K ~ xi times and release the best run.
//
// Two accountants are provided. SelectEpsilonFdp works from the base
// mechanism's trade-off curve; SelectEpsilonRdp is the earlier Renyi-DP bound
// for truncated negative binomial run counts and is kept for comparison.

#ifndef PRIVSEL_ACCOUNTANT_H_
#define PRIVSEL_ACCOUNTANT_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "privsel/runcount.h"
#include "privsel/tradeoff.h"

namespace privsel {

enum class BoundMethod { kFdpOurs, kRdpPrior };

// "FDP_OURS" or "RDP_PRIOR".
absl::string_view BoundMethodName(BoundMethod method);

struct AccountantReport {
  BoundMethod method = BoundMethod::kFdpOurs;
  // Final epsilon of the selection protocol at delta_h.
  double eps_h = 0.0;
  double delta_h = 0.0;
  // f-DP method: epsilon of the base curve at delta_h / omega(1), and the
  // maximised log-ratio term with its maximiser. eps_h = eps_base + log_ratio.
  double eps_base = 0.0;
  double log_ratio = 0.0;
  double argmax_a = 0.0;
  // RDP method: the minimising pair of orders.
  double alpha = 0.0;
  double alpha_prime = 0.0;
};

struct LogRatioMax {
  double value = 0.0;
  double argmax_a = 0.0;
};

// max over a in [0, 1] of log(omega(1 - a) / omega(f(a))). A uniform scan of
// 10^4 cells, supplemented with log-spaced points near both endpoints, is
// refined by golden-section search around the best point.
LogRatioMax MaxLogOmegaRatio(const TradeoffCurve& curve,
                             const RunCountDist& dist);

// Runs the base curve through FdpToEpsDelta at delta_h / omega(1) and adds the
// log-ratio term. eps_h is +infinity when the base conversion is.
absl::StatusOr<AccountantReport> SelectEpsilonFdp(const TradeoffCurve& curve,
                                                  const RunCountDist& dist,
                                                  double delta_h);

// How an RDP guarantee (alpha, gamma) is turned into (epsilon, delta).
enum class RdpConversion {
  // epsilon = gamma + log(1/delta) / (alpha - 1).
  kClassic,
  // epsilon = gamma + log1p(-1/alpha) - (log(delta) + log(alpha)) / (alpha -
  // 1),
  // as used by the TensorFlow Privacy and Opacus accountants.
  kImproved,
};

// {1.1, 1.2, ..., 1.9} followed by the integers 2..512.
std::vector<double> DefaultRdpOrders();

struct RdpOptions {
  std::vector<double> orders = DefaultRdpOrders();
  RdpConversion conversion = RdpConversion::kImproved;
};

absl::StatusOr<double> RdpToEpsilon(double gamma, double alpha, double delta,
                                    RdpConversion conversion);

// RDP of N compositions of the (subsampled) Gaussian mechanism. With tau == 1
// this is N alpha / (2 sigma^2). With tau < 1 only integer alpha is supported
// and the binomial-expansion bound is used.
absl::StatusOr<double> GaussianRdp(const DpSgdConfig& config, double alpha);

struct RdpEpsilon {
  double epsilon = 0.0;
  double alpha = 0.0;
};

// Smallest epsilon over the order grid for DP-SGD at the given delta. Orders
// for which GaussianRdp is undefined are skipped.
absl::StatusOr<RdpEpsilon> DpSgdEpsilon(const DpSgdConfig& config, double delta,
                                        const RdpOptions& options = {});

// The noise multiplier at which DpSgdEpsilon equals `target_epsilon`.
absl::StatusOr<double> CalibrateNoiseMultiplier(double target_epsilon,
                                                double tau, int64_t n_iters,
                                                double delta,
                                                const RdpOptions& options = {});

// gamma-hat(alpha, alpha') of the selection protocol for TNB(eta, nu) run
// counts, given the base RDP values gamma(alpha) and gamma(alpha'):
//   gamma(alpha) + (1 + eta)(1 - 1/alpha') gamma(alpha')
//   + (1 + eta) log(1/nu) / alpha' + log(E[K]) / (alpha - 1).
double TnbSelectionRdp(double gamma_alpha, double gamma_alpha_prime,
                       double alpha, double alpha_prime, double eta, double nu,
                       double mean);

// Base mechanism described by its RDP curve alpha -> gamma(alpha). A non-OK
// status marks orders where the curve is not available.
using RdpCurve = std::function<absl::StatusOr<double>(double alpha)>;

// Minimum over (alpha, alpha') in options.orders^2 of the converted
// TnbSelectionRdp bound. Only TNB run counts are supported.
absl::StatusOr<AccountantReport> SelectEpsilonRdp(
    const RdpCurve& base, const RunCountDist& dist, double delta_h,
    const RdpOptions& options = {});
absl::StatusOr<AccountantReport> SelectEpsilonRdp(
    const DpSgdConfig& config, const RunCountDist& dist, double delta_h,
    const RdpOptions& options = {});

struct BoundComparison {
  // DP-SGD epsilon of a single run at delta_h under the RDP accountant.
  double eps_base = 0.0;
  double mu = 0.0;
  AccountantReport ours;
  // Only available for TNB run counts.
  std::optional<AccountantReport> prior;
};

// Both bounds for one DP-SGD configuration. The f-DP bound models the base run
// as DpSgdMu(config)-GDP.
absl::StatusOr<BoundComparison> CompareBounds(const DpSgdConfig& config,
                                              const RunCountDist& dist,
                                              double delta_h,
                                              const RdpOptions& options = {});

}  // namespace privsel

#endif  // PRIVSEL_ACCOUNTANT_H_
