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

#include "privsel/discrete.h"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "privsel/runcount.h"

namespace privsel {
namespace {

RunCountDist Tnb(double eta, double nu) {
  return *RunCountDist::TruncatedNegativeBinomial(eta, nu);
}

// Exact selection probabilities for a point-mass run count by enumerating
// every sequence of k draws.
std::vector<double> EnumerateSelection(const std::vector<double>& p,
                                       const ScorePartition& partition, int k) {
  const int m = static_cast<int>(p.size());
  std::vector<int> group_of(m);
  for (size_t g = 0; g < partition.size(); ++g) {
    for (int y : partition[g]) group_of[y] = static_cast<int>(g);
  }
  std::vector<double> q(m, 0.0);
  std::vector<int> draw(k, 0);
  while (true) {
    double prob = 1.0;
    int top = -1;
    for (int y : draw) {
      prob *= p[y];
      top = std::max(top, group_of[y]);
    }
    for (int y : partition[top]) q[y] += prob / partition[top].size();
    int i = 0;
    while (i < k && ++draw[i] == m) draw[i++] = 0;
    if (i == k) break;
  }
  return q;
}

// max over events S of q(S) - e^eps q'(S), in both directions.
double EventSubsetDelta(const std::vector<double>& q,
                        const std::vector<double>& qp, double eps) {
  const int m = static_cast<int>(q.size());
  double best = 0.0;
  for (int mask = 0; mask < (1 << m); ++mask) {
    double a = 0.0;
    double b = 0.0;
    for (int y = 0; y < m; ++y) {
      if (mask & (1 << y)) {
        a += q[y];
        b += qp[y];
      }
    }
    best = std::max({best, a - std::exp(eps) * b, b - std::exp(eps) * a});
  }
  return best;
}

struct ThreeSymbol {
  std::vector<double> q;
  std::vector<double> qp;
};

ThreeSymbol TunedThreeSymbol() {
  const FiniteMechanismPair pair = *ThreeSymbolPair();
  const RunCountDist d = Tnb(1.0, 1e-3);
  return {*SelectionDistribution(pair.p(), pair.partition(), d),
          *SelectionDistribution(pair.p_prime(), pair.partition(), d)};
}

TEST(ThreeSymbolTest, BasePairIsPureOne) {
  const FiniteMechanismPair pair = *ThreeSymbolPair();
  EXPECT_EQ(pair.alphabet(), (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_NEAR(PureDpEpsilon(pair.p(), pair.p_prime()), 1.0, 1e-12);
}

TEST(ThreeSymbolTest, TunedProbabilities) {
  const ThreeSymbol ex = TunedThreeSymbol();
  const std::vector<double> want_q = {8.66e-3, 2.60e-4, 9.91e-1};
  const std::vector<double> want_qp = {2.66e-3, 1.34e-5, 9.97e-1};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(ex.q[i] / want_q[i], 1.0, 6e-3) << i;
    EXPECT_NEAR(ex.qp[i] / want_qp[i], 1.0, 6e-3) << i;
  }
}

TEST(ThreeSymbolTest, TunedPureEpsilonAtSymbolB) {
  const ThreeSymbol ex = TunedThreeSymbol();
  const double eps = PureDpEpsilon(ex.q, ex.qp);
  EXPECT_NEAR(eps, 2.96, 0.005);
  EXPECT_NEAR(eps, std::abs(std::log(ex.q[1] / ex.qp[1])), 1e-15);
  EXPECT_LE(eps, 3.0);
  EXPECT_LE(3.0 - eps, 0.04);
}

TEST(ThreeSymbolTest, ApproxDeltaMatchesEventEnumeration) {
  const ThreeSymbol ex = TunedThreeSymbol();
  for (double eps : {0.0, 0.5, 2.0, 2.9}) {
    EXPECT_NEAR(ApproxDpDelta(ex.q, ex.qp, eps),
                EventSubsetDelta(ex.q, ex.qp, eps), 1e-15)
        << eps;
  }
  EXPECT_EQ(ApproxDpDelta(ex.q, ex.qp, PureDpEpsilon(ex.q, ex.qp)), 0.0);
}

TEST(ThreeSymbolTest, ApproxEpsilonInvertsDelta) {
  const ThreeSymbol ex = TunedThreeSymbol();
  const double eps = ApproxDpEpsilon(ex.q, ex.qp, 1e-5);
  EXPECT_LE(ApproxDpDelta(ex.q, ex.qp, eps), 1e-5);
  EXPECT_GT(ApproxDpDelta(ex.q, ex.qp, eps - 1e-9), 1e-5);
  EXPECT_LT(eps, PureDpEpsilon(ex.q, ex.qp));
}

TEST(SelectionDistributionTest, PointMassOneIsIdentity) {
  const std::vector<double> p = {0.2, 0.5, 0.3};
  const RunCountDist one = *RunCountDist::FromPointMass(1);
  const std::vector<double> q = *SelectionDistribution(p, StrictOrder(3), one);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(q[i], p[i], 1e-15);
}

TEST(SelectionDistributionTest, TwoUniformDraws) {
  const std::vector<double> q =
      *SelectionDistribution(std::vector<double>{0.5, 0.5}, StrictOrder(2),
                             *RunCountDist::FromPointMass(2));
  EXPECT_NEAR(q[0], 0.25, 1e-15);
  EXPECT_NEAR(q[1], 0.75, 1e-15);
}

TEST(SelectionDistributionTest, MatchesSequenceEnumeration) {
  const std::vector<double> p = {0.1, 0.25, 0.05, 0.3, 0.2, 0.1};
  const ScorePartition partition = {{2}, {0, 4}, {5}, {1, 3}};
  for (int k : {1, 2, 3, 4}) {
    const std::vector<double> exact = EnumerateSelection(p, partition, k);
    const std::vector<double> q =
        *SelectionDistribution(p, partition, *RunCountDist::FromPointMass(k));
    for (int y = 0; y < 6; ++y) EXPECT_NEAR(q[y], exact[y], 1e-14) << k;
  }
}

TEST(SelectionDistributionTest, SumsToOne) {
  std::mt19937_64 gen(3);
  std::exponential_distribution<double> expo;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(7);
    for (double& v : p) v = expo(gen);
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= s;
    for (const RunCountDist& d : {Tnb(1.0, 1e-3), Tnb(0.0, 1e-2), Tnb(2.0, 0.1),
                                  *RunCountDist::FromPointMass(5)}) {
      const std::vector<double> q =
          *SelectionDistribution(p, {{0, 1}, {2}, {3, 4, 5}, {6}}, d);
      EXPECT_NEAR(std::accumulate(q.begin(), q.end(), 0.0), 1.0, 1e-10);
    }
  }
}

TEST(SelectionDistributionTest, SingleGroupIsUniform) {
  const std::vector<double> p = {0.7, 0.2, 0.1};
  const std::vector<double> q =
      *SelectionDistribution(p, {{0, 1, 2}}, Tnb(1.0, 0.1));
  for (double v : q) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(SelectionDistributionTest, MonteCarloWithinFourStandardErrors) {
  const std::vector<double> p = {0.3, 0.1, 0.25, 0.35};
  const ScorePartition partition = {{1}, {0, 3}, {2}};
  for (const RunCountDist& d :
       {Tnb(1.0, 0.1), *RunCountDist::FromPointMass(3)}) {
    constexpr int64_t kTrials = 1'000'000;
    const std::vector<double> exact = *SelectionDistribution(p, partition, d);
    const std::vector<double> mc =
        *SimulateSelection(p, partition, d, kTrials, 99);
    for (int y = 0; y < 4; ++y) {
      const double se = std::sqrt(exact[y] * (1.0 - exact[y]) / kTrials);
      EXPECT_NEAR(mc[y], exact[y], 4.0 * se) << d.DebugString() << " " << y;
    }
  }
}

TEST(DivergenceTest, Examples) {
  const std::vector<double> a = {0.9, 0.1};
  const std::vector<double> b = {0.5, 0.5};
  EXPECT_NEAR(*RenyiDivergence(a, b, 2.0), std::log(1.64), 1e-15);
  EXPECT_EQ(*RenyiDivergence(a, a, 3.0), 0.0);
  EXPECT_EQ(PureDpEpsilon(a, a), 0.0);
  EXPECT_TRUE(std::isinf(*RenyiDivergence(std::vector<double>{0.5, 0.5},
                                          std::vector<double>{1.0, 0.0}, 2.0)));
  EXPECT_TRUE(std::isinf(PureDpEpsilon(std::vector<double>{0.5, 0.5},
                                       std::vector<double>{1.0, 0.0})));
  EXPECT_FALSE(RenyiDivergence(a, b, 1.0).ok());
}

TEST(DivergenceTest, MonotoneInOrder) {
  const std::vector<double> a = {0.05, 0.4, 0.15, 0.4};
  const std::vector<double> b = {0.3, 0.2, 0.25, 0.25};
  double previous = 0.0;
  for (double alpha = 1.05; alpha < 64.0; alpha *= 1.3) {
    const double d = *RenyiDivergence(a, b, alpha);
    EXPECT_GE(d, previous - 1e-15) << alpha;
    previous = d;
  }
}

TEST(RefinementTest, RefineToTotalOrderKeepsListedOrder) {
  EXPECT_EQ(RefineToTotalOrder({{2, 0}, {1}, {4, 3}}),
            (ScorePartition{{2}, {0}, {1}, {4}, {3}}));
}

TEST(RefinementTest, SingleGroupGroupedDivergenceIsZero) {
  const FiniteMechanismPair pair = *FiniteMechanismPair::Create(
      {"x", "y", "z"}, {0.6, 0.3, 0.1}, {0.2, 0.3, 0.5}, {{0, 1, 2}});
  const RefinementCheck check = *CheckScoreRefinement(pair, Tnb(1.0, 0.1), 2.0);
  EXPECT_EQ(check.grouped, 0.0);
  EXPECT_GT(check.refined, 0.0);
  EXPECT_TRUE(check.holds);
}

TEST(RefinementTest, SixSymbolsThreeRuns) {
  const FiniteMechanismPair pair = *FiniteMechanismPair::Create(
      {"a", "b", "c", "d", "e", "f"}, {0.12, 0.31, 0.07, 0.2, 0.18, 0.12},
      {0.25, 0.05, 0.22, 0.13, 0.1, 0.25}, {{0, 3}, {1}, {2, 4, 5}});
  const RunCountDist three = *RunCountDist::FromPointMass(3);
  const RefinementCheck check = *CheckScoreRefinement(pair, three, 2.0);
  const std::vector<double> q =
      EnumerateSelection(pair.p(), pair.partition(), 3);
  const std::vector<double> qp =
      EnumerateSelection(pair.p_prime(), pair.partition(), 3);
  EXPECT_NEAR(check.grouped, *RenyiDivergence(q, qp, 2.0), 1e-12);
  EXPECT_LE(check.grouped, check.refined);
  EXPECT_TRUE(check.holds);
}

TEST(RefinementTest, RequiresATie) {
  const FiniteMechanismPair pair = *FiniteMechanismPair::Create(
      {"a", "b"}, {0.5, 0.5}, {0.4, 0.6}, StrictOrder(2));
  EXPECT_FALSE(
      CheckScoreRefinement(pair, *RunCountDist::FromPointMass(2), 2.0).ok());
}

TEST(RefinementTest, CampaignHoldsEverywhereAndIsDeterministic) {
  const CampaignResult serial = *RunRefinementCampaign(1000, 7, 1);
  EXPECT_EQ(serial.instances, 1000);
  EXPECT_EQ(serial.passed, 1000);
  EXPECT_TRUE(serial.failures.empty());
  const CampaignResult threaded = *RunRefinementCampaign(1000, 7, 4);
  EXPECT_EQ(threaded.passed, serial.passed);
  EXPECT_EQ(threaded.worst_gap, serial.worst_gap);
}

TEST(FiniteMechanismPairTest, Validation) {
  EXPECT_FALSE(FiniteMechanismPair::Create({"a", "b"}, {0.5, 0.6}, {0.5, 0.5},
                                           StrictOrder(2))
                   .ok());
  EXPECT_FALSE(FiniteMechanismPair::Create({"a", "b"}, {0.5, 0.5}, {0.5, 0.5},
                                           {{0}, {0}})
                   .ok());
  EXPECT_FALSE(FiniteMechanismPair::Create({"a", "b"}, {1.5, -0.5}, {0.5, 0.5},
                                           StrictOrder(2))
                   .ok());
  EXPECT_FALSE(ValidatePartition({{0, 1}}, 3).ok());
  EXPECT_TRUE(ValidatePartition({{2}, {0, 1}}, 3).ok());
}

}  // namespace
}  // namespace privsel
