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

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "privsel/parallel.h"
#include "privsel/rng.h"

namespace privsel {
namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr double kSumTolerance = 1e-12;

absl::Status CheckProbabilityVector(const std::vector<double>& v,
                                    const char* name) {
  double total = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      return absl::InvalidArgumentError(
          absl::StrFormat("%s has an invalid entry %g", name, x));
    }
    total += x;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%s sums to %.17g instead of 1", name, total));
  }
  return absl::OkStatus();
}

absl::Status CheckSameLength(absl::Span<const double> q,
                             absl::Span<const double> q_prime) {
  if (q.size() != q_prime.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "vectors differ in length: %d vs %d", q.size(), q_prime.size()));
  }
  return absl::OkStatus();
}

double OneSidedDelta(absl::Span<const double> q,
                     absl::Span<const double> q_prime, double epsilon) {
  const double scale = std::exp(epsilon);
  double total = 0.0;
  for (size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    // Decide membership of the worst event on the log scale used by
    // PureDpEpsilon, so that delta is exactly 0 at the pure epsilon.
    if (q_prime[i] > 0.0 && std::log(q[i]) - std::log(q_prime[i]) <= epsilon) {
      continue;
    }
    total += std::max(0.0, q[i] - scale * q_prime[i]);
  }
  return total;
}

std::string FormatVector(const std::vector<double>& v) {
  return absl::StrCat("[",
                      absl::StrJoin(v, ", ",
                                    [](std::string* out, double x) {
                                      absl::StrAppend(
                                          out, absl::StrFormat("%.6g", x));
                                    }),
                      "]");
}

std::string FormatPartition(const ScorePartition& partition) {
  return absl::StrJoin(
      partition, " < ", [](std::string* out, const std::vector<int>& group) {
        absl::StrAppend(out, "{", absl::StrJoin(group, ","), "}");
      });
}

}  // namespace

absl::Status ValidatePartition(const ScorePartition& partition, int size) {
  std::vector<int> seen(size, 0);
  for (const std::vector<int>& group : partition) {
    if (group.empty()) {
      return absl::InvalidArgumentError("score partition has an empty group");
    }
    for (int index : group) {
      if (index < 0 || index >= size) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "score partition refers to symbol %d outside [0, %d)", index,
            size));
      }
      if (seen[index]++ > 0) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "symbol %d appears twice in the score partition", index));
      }
    }
  }
  for (int i = 0; i < size; ++i) {
    if (seen[i] == 0) {
      return absl::InvalidArgumentError(
          absl::StrFormat("symbol %d is missing from the score partition", i));
    }
  }
  return absl::OkStatus();
}

ScorePartition StrictOrder(int size) {
  ScorePartition partition(size);
  for (int i = 0; i < size; ++i) partition[i] = {i};
  return partition;
}

absl::StatusOr<FiniteMechanismPair> FiniteMechanismPair::Create(
    std::vector<std::string> alphabet, std::vector<double> p,
    std::vector<double> p_prime, ScorePartition partition) {
  const size_t m = alphabet.size();
  if (m == 0) return absl::InvalidArgumentError("alphabet is empty");
  if (p.size() != m || p_prime.size() != m) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "alphabet has %d symbols but the vectors have %d and %d entries", m,
        p.size(), p_prime.size()));
  }
  if (absl::Status s = CheckProbabilityVector(p, "p"); !s.ok()) return s;
  if (absl::Status s = CheckProbabilityVector(p_prime, "p_prime"); !s.ok()) {
    return s;
  }
  if (absl::Status s = ValidatePartition(partition, static_cast<int>(m));
      !s.ok()) {
    return s;
  }
  return FiniteMechanismPair(std::move(alphabet), std::move(p),
                             std::move(p_prime), std::move(partition));
}

absl::StatusOr<std::vector<double>> SelectionDistribution(
    absl::Span<const double> probs, const ScorePartition& partition,
    const RunCountDist& dist) {
  if (absl::Status s =
          ValidatePartition(partition, static_cast<int>(probs.size()));
      !s.ok()) {
    return s;
  }
  const size_t groups = partition.size();
  std::vector<double> mass(groups, 0.0);
  for (size_t g = 0; g < groups; ++g) {
    for (int i : partition[g]) mass[g] += probs[i];
  }
  // tail[g]: probability of a draw scoring strictly above group g.
  std::vector<double> tail(groups, 0.0);
  for (size_t g = groups - 1; g > 0; --g) tail[g - 1] = tail[g] + mass[g];

  std::vector<double> q(probs.size(), 0.0);
  for (size_t g = 0; g < groups; ++g) {
    const double share = dist.PgfIncrement(tail[g], mass[g]) /
                         static_cast<double>(partition[g].size());
    for (int i : partition[g]) q[i] = share;
  }
  return q;
}

absl::StatusOr<std::vector<double>> SimulateSelection(
    absl::Span<const double> probs, const ScorePartition& partition,
    const RunCountDist& dist, int64_t trials, uint64_t seed) {
  const int m = static_cast<int>(probs.size());
  if (absl::Status s = ValidatePartition(partition, m); !s.ok()) return s;
  if (trials < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("trials must be >= 1, got %d", trials));
  }
  std::vector<int> rank(m);
  for (size_t g = 0; g < partition.size(); ++g) {
    for (int i : partition[g]) rank[i] = static_cast<int>(g);
  }
  std::vector<double> cdf(m);
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());

  std::vector<int64_t> counts(m, 0);
  for (int64_t t = 0; t < trials; ++t) {
    SplitMix64 gen = SplitMix64::ForStream(seed, static_cast<uint64_t>(t));
    const int64_t k = dist.Sample(gen);
    int top = -1;
    for (int64_t draw = 0; draw < k; ++draw) {
      const double u = UniformOpen01(gen) * cdf.back();
      const int symbol = static_cast<int>(std::min<ptrdiff_t>(
          std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), m - 1));
      top = std::max(top, rank[symbol]);
    }
    const std::vector<int>& group = partition[top];
    const size_t pick = std::min<size_t>(
        group.size() - 1,
        static_cast<size_t>(UniformOpen01(gen) * group.size()));
    ++counts[group[pick]];
  }
  std::vector<double> freq(m);
  for (int i = 0; i < m; ++i) {
    freq[i] = static_cast<double>(counts[i]) / static_cast<double>(trials);
  }
  return freq;
}

double PureDpEpsilon(absl::Span<const double> q,
                     absl::Span<const double> q_prime) {
  if (q.size() != q_prime.size()) return kInfinity;
  double eps = 0.0;
  for (size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0 && q_prime[i] == 0.0) continue;
    if (q[i] == 0.0 || q_prime[i] == 0.0) return kInfinity;
    eps = std::max(eps, std::abs(std::log(q[i]) - std::log(q_prime[i])));
  }
  return eps;
}

double ApproxDpDelta(absl::Span<const double> q,
                     absl::Span<const double> q_prime, double epsilon) {
  if (q.size() != q_prime.size()) return 1.0;
  return std::max(OneSidedDelta(q, q_prime, epsilon),
                  OneSidedDelta(q_prime, q, epsilon));
}

double ApproxDpEpsilon(absl::Span<const double> q,
                       absl::Span<const double> q_prime, double delta) {
  if (ApproxDpDelta(q, q_prime, 0.0) <= delta) return 0.0;
  double hi = PureDpEpsilon(q, q_prime);
  if (!std::isfinite(hi)) {
    // Mass on symbols the other side never produces cannot be bought back.
    hi = 1.0;
    while (ApproxDpDelta(q, q_prime, hi) > delta) {
      hi *= 2.0;
      if (hi > 1e4) return kInfinity;
    }
  }
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ApproxDpDelta(q, q_prime, mid) > delta ? lo : hi) = mid;
  }
  return hi;
}

absl::StatusOr<double> RenyiDivergence(absl::Span<const double> q,
                                       absl::Span<const double> q_prime,
                                       double alpha) {
  if (absl::Status s = CheckSameLength(q, q_prime); !s.ok()) return s;
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("alpha must be finite and > 1, got %g", alpha));
  }
  // sum_y q'(y) (q(y) / q'(y))^alpha is written as 1 + sum_y q'(y) expm1(t_y)
  // with t_y = alpha log(q(y) / q'(y)), which is exact for equal vectors and
  // keeps small divergences accurate. Large exponents switch to log-sum-exp.
  std::vector<double> log_weight;
  std::vector<double> exponent;
  for (size_t i = 0; i < q.size(); ++i) {
    if (q_prime[i] == 0.0) {
      if (q[i] != 0.0) return kInfinity;
      continue;
    }
    log_weight.push_back(std::log(q_prime[i]));
    exponent.push_back(q[i] == 0.0
                           ? -kInfinity
                           : alpha * (std::log(q[i]) - std::log(q_prime[i])));
  }
  if (exponent.empty()) return 0.0;
  const double largest = *std::max_element(exponent.begin(), exponent.end());
  if (largest < 30.0) {
    double excess = 0.0;
    for (size_t i = 0; i < exponent.size(); ++i) {
      excess += std::exp(log_weight[i]) * std::expm1(exponent[i]);
    }
    return std::max(0.0, std::log1p(excess) / (alpha - 1.0));
  }
  double top = -kInfinity;
  for (size_t i = 0; i < exponent.size(); ++i) {
    top = std::max(top, log_weight[i] + exponent[i]);
  }
  double sum = 0.0;
  for (size_t i = 0; i < exponent.size(); ++i) {
    sum += std::exp(log_weight[i] + exponent[i] - top);
  }
  return std::max(0.0, (top + std::log(sum)) / (alpha - 1.0));
}

ScorePartition RefineToTotalOrder(const ScorePartition& partition) {
  ScorePartition refined;
  for (const std::vector<int>& group : partition) {
    for (int i : group) refined.push_back({i});
  }
  return refined;
}

absl::StatusOr<RefinementCheck> CheckScoreRefinement(
    const FiniteMechanismPair& pair, const RunCountDist& dist, double alpha) {
  const ScorePartition& grouped = pair.partition();
  if (std::none_of(grouped.begin(), grouped.end(),
                   [](const std::vector<int>& g) { return g.size() >= 2; })) {
    return absl::InvalidArgumentError(
        "the score partition has no group with two or more symbols");
  }
  const ScorePartition refined = RefineToTotalOrder(grouped);
  absl::StatusOr<std::vector<double>> q =
      SelectionDistribution(pair.p(), grouped, dist);
  if (!q.ok()) return q.status();
  absl::StatusOr<std::vector<double>> q_prime =
      SelectionDistribution(pair.p_prime(), grouped, dist);
  if (!q_prime.ok()) return q_prime.status();
  absl::StatusOr<std::vector<double>> r =
      SelectionDistribution(pair.p(), refined, dist);
  if (!r.ok()) return r.status();
  absl::StatusOr<std::vector<double>> r_prime =
      SelectionDistribution(pair.p_prime(), refined, dist);
  if (!r_prime.ok()) return r_prime.status();

  RefinementCheck check;
  absl::StatusOr<double> d_grouped = RenyiDivergence(*q, *q_prime, alpha);
  if (!d_grouped.ok()) return d_grouped.status();
  absl::StatusOr<double> d_refined = RenyiDivergence(*r, *r_prime, alpha);
  if (!d_refined.ok()) return d_refined.status();
  check.grouped = *d_grouped;
  check.refined = *d_refined;
  check.holds = check.grouped <=
                check.refined + 1e-12 * std::max(1.0, std::abs(check.refined));
  return check;
}

absl::StatusOr<FiniteMechanismPair> ThreeSymbolPair(double b, double d,
                                                    double epsilon) {
  const double e = std::exp(epsilon);
  std::vector<double> p = {1.0 - b * e - d * b, b * e, d * b};
  std::vector<double> p_prime = {1.0 - b - d * b * e, b, d * b * e};
  return FiniteMechanismPair::Create({"A", "B", "C"}, std::move(p),
                                     std::move(p_prime), StrictOrder(3));
}

absl::StatusOr<CampaignResult> RunRefinementCampaign(int64_t instances,
                                                     uint64_t seed,
                                                     int threads) {
  if (instances < 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("instances must be >= 0, got %d", instances));
  }
  std::vector<RunCountDist> dists;
  for (absl::StatusOr<RunCountDist> d :
       {RunCountDist::FromPointMass(2), RunCountDist::FromPointMass(5),
        RunCountDist::TruncatedNegativeBinomial(1.0, 0.1)}) {
    if (!d.ok()) return d.status();
    dists.push_back(*std::move(d));
  }
  constexpr std::array<double, 3> kAlphas = {1.5, 2.0, 8.0};

  struct Outcome {
    absl::Status status;
    RefinementCheck check;
    std::string description;
  };
  std::vector<Outcome> outcomes(instances);
  ParallelFor(
      instances,
      [&](int64_t begin, int64_t end) {
        for (int64_t i = begin; i < end; ++i) {
          SplitMix64 gen =
              SplitMix64::ForStream(seed, static_cast<uint64_t>(i));
          const int m = 3 + static_cast<int>(gen() % 6);
          std::vector<double> p(m);
          std::vector<double> p_prime(m);
          for (std::vector<double>* v : {&p, &p_prime}) {
            double total = 0.0;
            for (double& x : *v) {
              x = -std::log(UniformOpen01(gen));
              total += x;
            }
            for (double& x : *v) x /= total;
          }
          // Shuffle the symbols, then cut the sequence into 1..m-1 groups so
          // at least one group holds two or more symbols.
          std::vector<int> order(m);
          std::iota(order.begin(), order.end(), 0);
          for (int j = m - 1; j > 0; --j) {
            std::swap(order[j], order[gen() % (j + 1)]);
          }
          const int groups = 1 + static_cast<int>(gen() % (m - 1));
          std::vector<int> cuts(m - 1);
          std::iota(cuts.begin(), cuts.end(), 1);
          for (int j = 0; j < groups - 1; ++j) {
            std::swap(cuts[j], cuts[j + gen() % (cuts.size() - j)]);
          }
          cuts.resize(groups - 1);
          std::sort(cuts.begin(), cuts.end());
          cuts.push_back(m);
          ScorePartition partition;
          int start = 0;
          for (int cut : cuts) {
            partition.emplace_back(order.begin() + start, order.begin() + cut);
            start = cut;
          }
          const RunCountDist& dist = dists[gen() % dists.size()];
          const double alpha = kAlphas[gen() % kAlphas.size()];

          std::vector<std::string> alphabet(m);
          for (int j = 0; j < m; ++j) alphabet[j] = absl::StrCat("s", j);
          Outcome& out = outcomes[i];
          out.description = absl::StrFormat(
              "instance %d: p=%s p'=%s partition=%s xi=%s alpha=%g", i,
              FormatVector(p), FormatVector(p_prime),
              FormatPartition(partition), dist.DebugString(), alpha);
          absl::StatusOr<FiniteMechanismPair> pair =
              FiniteMechanismPair::Create(std::move(alphabet), std::move(p),
                                          std::move(p_prime),
                                          std::move(partition));
          if (!pair.ok()) {
            out.status = pair.status();
            continue;
          }
          absl::StatusOr<RefinementCheck> check =
              CheckScoreRefinement(*pair, dist, alpha);
          if (!check.ok()) {
            out.status = check.status();
            continue;
          }
          out.check = *check;
        }
      },
      threads);

  CampaignResult result;
  result.instances = instances;
  result.worst_gap = -kInfinity;
  for (const Outcome& out : outcomes) {
    if (!out.status.ok()) return out.status;
    result.worst_gap =
        std::max(result.worst_gap, out.check.grouped - out.check.refined);
    if (out.check.holds) {
      ++result.passed;
    } else if (result.failures.size() < 10) {
      result.failures.push_back(
          absl::StrFormat("%s grouped=%.17g refined=%.17g", out.description,
                          out.check.grouped, out.check.refined));
    }
  }
  if (instances == 0) result.worst_gap = 0.0;
  return result;
}

}  // namespace privsel
