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

// Empirical privacy lower bound for the private selection protocol.
//
// The distinguishing game reduces one DP-SGD training run to a univariate
// Gaussian: without the canary the run's score is N(0, 1); with it the score
// is N(B / (sigma sqrt(N)), 1) where B ~ Binomial(N, tau) counts the
// iterations that sampled the canary. The protocol runs K ~ xi independent
// trainings and reports the largest score. An adversary thresholds that score
// and the confusion rates, upper-bounded with Clopper-Pearson intervals, give
// the lower bound epsilon_L.

#ifndef PRIVSEL_AUDIT_H_
#define PRIVSEL_AUDIT_H_

#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "privsel/runcount.h"
#include "privsel/tradeoff.h"

namespace privsel {

struct GameConfig {
  DpSgdConfig config;
  RunCountDist dist = *RunCountDist::FromPointMass(1);
  int64_t trials = 10'000'000;
  uint64_t seed = 1;
  double confidence = 0.95;
  double delta = 1e-5;
};

absl::Status ValidateGameConfig(const GameConfig& cfg);

enum class SimulationMode {
  // Draws the maximum of the K run scores directly from its distribution
  // function F(z)^K. Cost per trial does not depend on K.
  kOrderStatistic,
  // Draws every run (binomial shift and Gaussian noise) and takes the maximum.
  kPerRun,
};

// One entry per trial, in trial order.
struct GameSamples {
  std::vector<uint8_t> truth;
  std::vector<double> score;
};

// Plays cfg.trials rounds of the game. Trial t uses stream t of cfg.seed, so
// the output does not depend on the thread count.
absl::StatusOr<GameSamples> SimulateGame(
    const GameConfig& cfg,
    SimulationMode mode = SimulationMode::kOrderStatistic, int threads = 0);

// One-sided upper confidence limit for a binomial proportion: the
// `confidence` quantile of Beta(successes + 1, trials - successes), and 1 when
// successes == trials.
absl::StatusOr<double> ClopperPearsonUpper(int64_t successes, int64_t trials,
                                           double confidence);

// max{log((1 - delta - fp) / fn), log((1 - delta - fn) / fp), 0}. Branches
// whose numerator is not positive are skipped.
double EpsLowerBound(double fp, double fn, double delta);

struct ThresholdRow {
  double threshold = 0.0;
  // Empirical rates: fp among truth = 0 trials, fn among truth = 1 trials.
  double fp = 0.0;
  double fn = 0.0;
  double fp_upper = 0.0;
  double fn_upper = 0.0;
  double eps_lower = 0.0;
};

struct AuditReport {
  int64_t trials = 0;
  double best_threshold = 0.0;
  int64_t true_positive = 0;
  int64_t false_positive = 0;
  int64_t true_negative = 0;
  int64_t false_negative = 0;
  double fp_upper = 1.0;
  double fn_upper = 1.0;
  double eps_lower = 0.0;
  std::vector<ThresholdRow> sweep;
};

// Thresholds at 512 empirical quantiles of the pooled scores: 128 spread
// uniformly and 192 log-spaced towards each tail, from max(1/n, 1e-7) to 0.1.
std::vector<double> ThresholdGrid(const std::vector<double>& sorted_scores);

// Sweeps ThresholdGrid (guess 1 iff score > threshold) and keeps the
// threshold with the largest epsilon lower bound.
absl::StatusOr<AuditReport> ConcludeAudit(const GameSamples& samples,
                                          double confidence, double delta);

// SimulateGame followed by ConcludeAudit.
absl::StatusOr<AuditReport> RunAudit(
    const GameConfig& cfg,
    SimulationMode mode = SimulationMode::kOrderStatistic, int threads = 0);

struct RocPoint {
  double fp = 0.0;
  double fn = 0.0;
};

// Empirical (fp, fn) rates at each threshold.
std::vector<RocPoint> EmpiricalRoc(const GameSamples& samples,
                                   const std::vector<double>& thresholds);

// max over points of |fn - f(fp)|.
double RocSupDistance(const std::vector<RocPoint>& roc,
                      const TradeoffCurve& curve);

}  // namespace privsel

#endif  // PRIVSEL_AUDIT_H_
