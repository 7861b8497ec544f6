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

#include "privsel/audit.h"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "gtest/gtest.h"
#include "privsel/accountant.h"
#include "privsel/runcount.h"
#include "privsel/tradeoff.h"

namespace privsel {
namespace {

GameConfig MakeGame(double sigma, double tau, int64_t n_iters,
                    RunCountDist dist, int64_t trials, uint64_t seed) {
  GameConfig cfg;
  cfg.config = *DpSgdConfig::Create(sigma, tau, n_iters);
  cfg.dist = std::move(dist);
  cfg.trials = trials;
  cfg.seed = seed;
  return cfg;
}

std::vector<double> ScoresWithTruth(const GameSamples& s, uint8_t truth) {
  std::vector<double> out;
  for (size_t i = 0; i < s.score.size(); ++i) {
    if (s.truth[i] == truth) out.push_back(s.score[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Two-sample Kolmogorov-Smirnov statistic of sorted samples.
double KsStatistic(const std::vector<double>& a, const std::vector<double>& b) {
  size_t i = 0;
  size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

// Asymptotic 1% critical value of the two-sample statistic.
double KsCritical(size_t n, size_t m) {
  return 1.628 * std::sqrt(static_cast<double>(n + m) / (n * m));
}

double BinomialCdf(int64_t x, int64_t n, double p) {
  double total = 0.0;
  for (int64_t j = 0; j <= x; ++j) {
    total += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                      std::lgamma(n - j + 1.0) + j * std::log(p) +
                      (n - j) * std::log1p(-p));
  }
  return total;
}

// The p at which observing at most x successes has probability 1 - c.
double BisectUpperLimit(int64_t x, int64_t n, double c) {
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (BinomialCdf(x, n, mid) > 1.0 - c ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TEST(ClopperPearsonTest, Examples) {
  EXPECT_NEAR(*ClopperPearsonUpper(0, 10, 0.975), 1.0 - std::pow(0.025, 0.1),
              1e-12);
  EXPECT_NEAR(*ClopperPearsonUpper(0, 10, 0.975), 0.3085, 1e-4);
  EXPECT_EQ(*ClopperPearsonUpper(10, 10, 0.95), 1.0);
  EXPECT_FALSE(ClopperPearsonUpper(0, 0, 0.95).ok());
  EXPECT_FALSE(ClopperPearsonUpper(3, 2, 0.95).ok());
  EXPECT_FALSE(ClopperPearsonUpper(1, 2, 1.0).ok());
}

TEST(ClopperPearsonTest, MatchesBinomialCdfInversion) {
  for (auto [x, n] : std::vector<std::pair<int64_t, int64_t>>{
           {1, 10}, {3, 50}, {17, 200}, {150, 400}, {999, 1000}}) {
    for (double c : {0.9, 0.95, 0.99}) {
      EXPECT_NEAR(*ClopperPearsonUpper(x, n, c), BisectUpperLimit(x, n, c),
                  1e-9)
          << x << "/" << n << " c=" << c;
    }
  }
}

TEST(EpsLowerBoundTest, Examples) {
  EXPECT_NEAR(EpsLowerBound(0.1, 0.2, 1e-5),
              std::max(std::log((1 - 1e-5 - 0.1) / 0.2),
                       std::log((1 - 1e-5 - 0.2) / 0.1)),
              1e-15);
  EXPECT_NEAR(EpsLowerBound(0.1, 0.2, 1e-5), 2.079, 1e-3);
  EXPECT_EQ(EpsLowerBound(0.5, 0.5, 1e-5), 0.0);
  EXPECT_EQ(EpsLowerBound(0.7, 0.6, 0.0), 0.0);
  EXPECT_TRUE(std::isinf(EpsLowerBound(0.0, 0.3, 1e-5)));
}

TEST(SimulateGameTest, FullBatchScoresAreShiftedNormals) {
  const double sigma = 20.0;
  const int64_t n_iters = 400;
  const GameSamples s = *SimulateGame(MakeGame(
      sigma, 1.0, n_iters, *RunCountDist::FromPointMass(1), 400'000, 3));
  const double shift = std::sqrt(static_cast<double>(n_iters)) / sigma;
  for (uint8_t truth : {0, 1}) {
    const std::vector<double> x = ScoresWithTruth(s, truth);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= x.size();
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= x.size() - 1;
    const double se = 1.0 / std::sqrt(static_cast<double>(x.size()));
    EXPECT_NEAR(mean, truth ? shift : 0.0, 4.0 * se) << int{truth};
    EXPECT_NEAR(var, 1.0, 4.0 * std::sqrt(2.0) * se) << int{truth};
  }
}

TEST(SimulateGameTest, HugeNoiseHidesTheCanary) {
  const GameSamples s = *SimulateGame(
      MakeGame(1e6, 1.0, 100, *RunCountDist::Geometric(0.1), 400'000, 4));
  const std::vector<double> null_scores = ScoresWithTruth(s, 0);
  const std::vector<double> alt_scores = ScoresWithTruth(s, 1);
  EXPECT_LT(KsStatistic(null_scores, alt_scores),
            KsCritical(null_scores.size(), alt_scores.size()));
}

TEST(SimulateGameTest, IndependentOfThreadCount) {
  const GameConfig cfg =
      MakeGame(3.0, 0.2, 50,
               *RunCountDist::TruncatedNegativeBinomial(1.0, 0.05), 100'000, 8);
  const GameSamples one =
      *SimulateGame(cfg, SimulationMode::kOrderStatistic, 1);
  const GameSamples four =
      *SimulateGame(cfg, SimulationMode::kOrderStatistic, 4);
  EXPECT_EQ(one.truth, four.truth);
  EXPECT_EQ(one.score, four.score);
  const GameSamples per_run_one =
      *SimulateGame(cfg, SimulationMode::kPerRun, 1);
  const GameSamples per_run_three =
      *SimulateGame(cfg, SimulationMode::kPerRun, 3);
  EXPECT_EQ(per_run_one.score, per_run_three.score);
}

TEST(SimulateGameTest, OrderStatisticAgreesWithPerRunSimulation) {
  for (double tau : {1.0, 0.3}) {
    const RunCountDist d = *RunCountDist::TruncatedNegativeBinomial(1.0, 0.1);
    const GameSamples fast =
        *SimulateGame(MakeGame(2.0, tau, 16, d, 200'000, 21),
                      SimulationMode::kOrderStatistic);
    const GameSamples slow = *SimulateGame(
        MakeGame(2.0, tau, 16, d, 200'000, 22), SimulationMode::kPerRun);
    for (uint8_t truth : {0, 1}) {
      const std::vector<double> a = ScoresWithTruth(fast, truth);
      const std::vector<double> b = ScoresWithTruth(slow, truth);
      EXPECT_LT(KsStatistic(a, b), KsCritical(a.size(), b.size()))
          << "tau=" << tau << " truth=" << int{truth};
    }
  }
}

TEST(AuditTest, RocMatchesGaussianTradeoff) {
  const double sigma = 1.0;
  const GameSamples s = *SimulateGame(
      MakeGame(sigma, 1.0, 1, *RunCountDist::FromPointMass(1), 1'000'000, 5));
  std::vector<double> sorted = s.score;
  std::sort(sorted.begin(), sorted.end());
  const std::vector<RocPoint> roc = EmpiricalRoc(s, ThresholdGrid(sorted));
  EXPECT_LT(RocSupDistance(roc, *TradeoffCurve::FromGaussian(1.0 / sigma)),
            0.005);
}

TEST(AuditTest, NoSignalGivesNearZeroLowerBound) {
  const AuditReport r = *RunAudit(
      MakeGame(1e6, 1.0, 1, *RunCountDist::FromPointMass(1), 1'000'000, 6));
  EXPECT_LE(r.eps_lower, 0.05);
  EXPECT_EQ(r.trials, 1'000'000);
}

TEST(AuditTest, LowerBoundNeverExceedsUpperBound) {
  for (auto [sigma, eta, nu] : std::vector<std::tuple<double, double, double>>{
           {1.0, 1.0, 1e-2}, {0.7, 0.0, 1e-2}, {2.0, 2.0, 1e-2}}) {
    const RunCountDist d = *RunCountDist::TruncatedNegativeBinomial(eta, nu);
    const GameConfig cfg = MakeGame(sigma, 1.0, 1, d, 1'000'000, 9);
    const AuditReport r = *RunAudit(cfg);
    const double upper =
        SelectEpsilonFdp(*TradeoffCurve::FromGaussian(1.0 / sigma), d, 1e-5)
            ->eps_h;
    EXPECT_LE(r.eps_lower, upper) << sigma << " " << eta << " " << nu;
    EXPECT_GT(r.eps_lower, 0.0);
  }
}

TEST(AuditTest, ReportIsConsistentWithSweep) {
  const AuditReport r = *RunAudit(
      MakeGame(1.0, 1.0, 1, *RunCountDist::Geometric(0.1), 200'000, 12));
  ASSERT_FALSE(r.sweep.empty());
  double best = 0.0;
  for (const ThresholdRow& row : r.sweep) best = std::max(best, row.eps_lower);
  EXPECT_EQ(best, r.eps_lower);
  EXPECT_EQ(
      r.true_positive + r.false_positive + r.true_negative + r.false_negative,
      r.trials);
}

TEST(ThresholdGridTest, SortedAndUnique) {
  std::vector<double> scores(10'000);
  for (size_t i = 0; i < scores.size(); ++i) scores[i] = std::sqrt(i);
  const std::vector<double> grid = ThresholdGrid(scores);
  EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
  EXPECT_EQ(std::adjacent_find(grid.begin(), grid.end()), grid.end());
  EXPECT_GT(grid.size(), 100u);
}

TEST(GameConfigTest, Validation) {
  GameConfig cfg;
  EXPECT_TRUE(ValidateGameConfig(cfg).ok());
  cfg.trials = 0;
  EXPECT_FALSE(ValidateGameConfig(cfg).ok());
  cfg.trials = 10;
  cfg.confidence = 1.5;
  EXPECT_FALSE(ValidateGameConfig(cfg).ok());
}

}  // namespace
}  // namespace privsel
