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

// Exact computations for finite-alphabet mechanisms run through the private
// selection protocol.
//
// A score function over the alphabet is described by an ordered partition:
// symbols in the same group share a score and groups are listed in increasing
// score order. The protocol draws K ~ xi outputs and releases the one with the
// highest score. Ties are broken by a uniform choice among the symbols of the
// winning group.

#ifndef PRIVSEL_DISCRETE_H_
#define PRIVSEL_DISCRETE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/types/span.h"
#include "privsel/runcount.h"

namespace privsel {

// Groups of symbol indices in increasing score order.
using ScorePartition = std::vector<std::vector<int>>;

class FiniteMechanismPair {
 public:
  // Both vectors must have one entry per symbol, be nonnegative and sum to 1
  // within 1e-12. The partition must cover every index exactly once.
  static absl::StatusOr<FiniteMechanismPair> Create(
      std::vector<std::string> alphabet, std::vector<double> p,
      std::vector<double> p_prime, ScorePartition partition);

  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const std::vector<double>& p() const { return p_; }
  const std::vector<double>& p_prime() const { return p_prime_; }
  const ScorePartition& partition() const { return partition_; }
  int size() const { return static_cast<int>(alphabet_.size()); }

 private:
  FiniteMechanismPair(std::vector<std::string> alphabet, std::vector<double> p,
                      std::vector<double> p_prime, ScorePartition partition)
      : alphabet_(std::move(alphabet)),
        p_(std::move(p)),
        p_prime_(std::move(p_prime)),
        partition_(std::move(partition)) {}

  std::vector<std::string> alphabet_;
  std::vector<double> p_;
  std::vector<double> p_prime_;
  ScorePartition partition_;
};

// Checks that `partition` covers {0, ..., size - 1} exactly once.
absl::Status ValidatePartition(const ScorePartition& partition, int size);

// Every symbol in its own group, in index order.
ScorePartition StrictOrder(int size);

// Distribution of the released symbol: for a symbol y in group G,
//   q(y) = (E[F_<=G^K] - E[F_<G^K]) / |G|
// where F_<=G (F_<G) is the probability of drawing a score at most (below) the
// score of G.
absl::StatusOr<std::vector<double>> SelectionDistribution(
    absl::Span<const double> probs, const ScorePartition& partition,
    const RunCountDist& dist);

// Monte Carlo estimate of SelectionDistribution that simulates the protocol
// literally: draw K, draw K symbols, keep the highest-scoring group and pick a
// symbol of it uniformly. Trial t uses stream t of `seed`.
absl::StatusOr<std::vector<double>> SimulateSelection(
    absl::Span<const double> probs, const ScorePartition& partition,
    const RunCountDist& dist, int64_t trials, uint64_t seed);

// max_y |log(q(y) / q'(y))|; +infinity when the supports differ.
double PureDpEpsilon(absl::Span<const double> q,
                     absl::Span<const double> q_prime);

// Smallest delta for which the pair is (epsilon, delta)-indistinguishable in
// both directions: max over orderings of sum_y max(0, q(y) - e^eps q'(y)).
double ApproxDpDelta(absl::Span<const double> q,
                     absl::Span<const double> q_prime, double epsilon);

// Smallest epsilon >= 0 with ApproxDpDelta(q, q', epsilon) <= delta, found by
// bisection; +infinity if no finite epsilon qualifies.
double ApproxDpEpsilon(absl::Span<const double> q,
                       absl::Span<const double> q_prime, double delta);

// D_alpha(q || q') = log(sum_y q(y)^alpha q'(y)^(1 - alpha)) / (alpha - 1),
// exactly 0 for equal vectors. +infinity when q puts mass where q' has none.
absl::StatusOr<double> RenyiDivergence(absl::Span<const double> q,
                                       absl::Span<const double> q_prime,
                                       double alpha);

// Splits every group into singletons, keeping the listed order inside each
// group. The result is a one-to-one score function that preserves the order
// between groups.
ScorePartition RefineToTotalOrder(const ScorePartition& partition);

struct RefinementCheck {
  double grouped = 0.0;
  double refined = 0.0;
  // grouped <= refined, up to a relative rounding allowance of 1e-12.
  bool holds = false;
};

// Renyi divergence of the released symbol under the grouped score function
// and under its order-preserving one-to-one refinement. Requires at least one
// group with two or more symbols.
absl::StatusOr<RefinementCheck> CheckScoreRefinement(
    const FiniteMechanismPair& pair, const RunCountDist& dist, double alpha);

// The three-symbol pair (A, B, C) with
//   P  = (1 - b e^eps - d b, b e^eps, d b)
//   P' = (1 - b - d b e^eps, b, d b e^eps)
// scored A < B < C. It is (eps, 0)-DP.
absl::StatusOr<FiniteMechanismPair> ThreeSymbolPair(double b = 1e-3,
                                                    double d = 100.0,
                                                    double epsilon = 1.0);

struct CampaignResult {
  int64_t instances = 0;
  int64_t passed = 0;
  // Largest grouped - refined observed (negative when every case holds).
  double worst_gap = 0.0;
  // Descriptions of the first few failing instances.
  std::vector<std::string> failures;
};

// Random instances: alphabet size 3..8, Dirichlet(1) vectors, a random
// partition with at least one group of two or more symbols, xi drawn from
// {PointMass(2), PointMass(5), TNB(1, 0.1)} and alpha from {1.5, 2, 8}.
// Instance i depends only on (seed, i).
absl::StatusOr<CampaignResult> RunRefinementCampaign(int64_t instances,
                                                     uint64_t seed,
                                                     int threads = 0);

}  // namespace privsel

#endif  // PRIVSEL_DISCRETE_H_
