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
#include <limits>
#include <optional>
#include <random>

#include "absl/strings/str_format.h"
#include "boost/math/special_functions/beta.hpp"
#include "privsel/normal.h"
#include "privsel/parallel.h"
#include "privsel/rng.h"

namespace privsel {
namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Maximum of k iid N(0, 1) draws from a uniform u: solves Phi(z)^k = u,
// switching to the upper tail when Phi(z) is close to 1.
double StandardMaxQuantile(double u, int64_t k) {
  const double log_cdf = std::log(u) / static_cast<double>(k);
  const double upper = -std::expm1(log_cdf);
  if (upper < 0.5) return NormalQuantileUpper(upper);
  return NormalQuantile(std::exp(log_cdf));
}

double LogAddExp(double a, double b) {
  if (a == -kInfinity) return b;
  if (b == -kInfinity) return a;
  const double top = std::max(a, b);
  return top + std::log1p(std::exp(-std::abs(a - b)));
}

// Distribution of one run's score when the canary is present and tau < 1:
// the Gaussian mixture sum_b Pr[B = b] N(b / (sigma sqrt(N)), 1). Its log-CDF
// and log-survival function are tabulated on a fine grid and the maximum of k
// runs is drawn by inverting F(z)^k with linear interpolation.
class MixtureMaxSampler {
 public:
  explicit MixtureMaxSampler(const DpSgdConfig& config) {
    const double n = static_cast<double>(config.n_iters);
    const double scale = 1.0 / (config.sigma * std::sqrt(n));
    const double log_tau = std::log(config.tau);
    const double log_keep = std::log1p(-config.tau);
    std::vector<double> shifts;
    std::vector<double> log_weights;
    double top = -kInfinity;
    for (int64_t b = 0; b <= config.n_iters; ++b) {
      const double bd = static_cast<double>(b);
      const double w = std::lgamma(n + 1.0) - std::lgamma(bd + 1.0) -
                       std::lgamma(n - bd + 1.0) + bd * log_tau +
                       (n - bd) * log_keep;
      top = std::max(top, w);
      shifts.push_back(bd * scale);
      log_weights.push_back(w);
    }
    // Mixture components below e^-80 of the mode do not move the tables.
    std::vector<double> kept_shifts;
    std::vector<double> kept_weights;
    for (size_t i = 0; i < shifts.size(); ++i) {
      if (log_weights[i] > top - 80.0) {
        kept_shifts.push_back(shifts[i]);
        kept_weights.push_back(log_weights[i]);
      }
    }
    z_lo_ = kept_shifts.front() - kMargin;
    const double z_hi = kept_shifts.back() + kMargin;
    const int64_t points =
        static_cast<int64_t>(std::ceil((z_hi - z_lo_) / kStep)) + 1;
    log_cdf_.resize(points);
    log_sf_.resize(points);
    for (int64_t i = 0; i < points; ++i) {
      const double z = z_lo_ + static_cast<double>(i) * kStep;
      double lc = -kInfinity;
      double ls = -kInfinity;
      for (size_t j = 0; j < kept_shifts.size(); ++j) {
        lc = LogAddExp(
            lc, kept_weights[j] + std::log(NormalCdf(z - kept_shifts[j])));
        ls = LogAddExp(
            ls, kept_weights[j] + std::log(NormalSf(z - kept_shifts[j])));
      }
      log_cdf_[i] = lc;
      log_sf_[i] = ls;
    }
    // Normalise by the retained mass so both tables tend to log(1).
    const double log_mass = LogAddExp(log_cdf_[0], log_sf_[0]);
    for (int64_t i = 0; i < points; ++i) {
      log_cdf_[i] -= log_mass;
      log_sf_[i] -= log_mass;
    }
  }

  double SampleMax(double u, int64_t k) const {
    const double log_cdf = std::log(u) / static_cast<double>(k);
    const double upper = -std::expm1(log_cdf);
    if (upper < 0.5) {
      // log_sf_ is decreasing; search on its negation.
      return Invert(log_sf_, std::log(upper), /*increasing=*/false);
    }
    return Invert(log_cdf_, log_cdf, /*increasing=*/true);
  }

 private:
  static constexpr double kStep = 2e-3;
  static constexpr double kMargin = 12.0;

  double Invert(const std::vector<double>& table, double target,
                bool increasing) const {
    const auto begin = table.begin();
    const auto end = table.end();
    auto it = increasing
                  ? std::lower_bound(begin, end, target)
                  : std::lower_bound(begin, end, target, std::greater<>());
    if (it == begin) return z_lo_;
    if (it == end) return z_lo_ + static_cast<double>(table.size() - 1) * kStep;
    const int64_t i = it - begin;
    const double y0 = table[i - 1];
    const double y1 = table[i];
    const double frac = y1 == y0 ? 0.0 : (target - y0) / (y1 - y0);
    return z_lo_ + (static_cast<double>(i - 1) + frac) * kStep;
  }

  double z_lo_ = 0.0;
  std::vector<double> log_cdf_;
  std::vector<double> log_sf_;
};

int64_t CountAbove(const std::vector<double>& sorted, double t) {
  return static_cast<int64_t>(
      sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t));
}

int64_t CountAtMost(const std::vector<double>& sorted, double t) {
  return static_cast<int64_t>(
      std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

void SplitSorted(const GameSamples& samples, std::vector<double>* null_scores,
                 std::vector<double>* alt_scores) {
  for (size_t i = 0; i < samples.score.size(); ++i) {
    (samples.truth[i] ? alt_scores : null_scores)->push_back(samples.score[i]);
  }
  std::sort(null_scores->begin(), null_scores->end());
  std::sort(alt_scores->begin(), alt_scores->end());
}

}  // namespace

absl::Status ValidateGameConfig(const GameConfig& cfg) {
  if (absl::Status s = ValidateDpSgdConfig(cfg.config); !s.ok()) return s;
  if (cfg.trials < 1) {
    return absl::InvalidArgumentError(
        absl::StrFormat("trials must be >= 1, got %d", cfg.trials));
  }
  if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "confidence must lie in (0, 1), got %g", cfg.confidence));
  }
  if (!(cfg.delta >= 0.0 && cfg.delta < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in [0, 1), got %g", cfg.delta));
  }
  return absl::OkStatus();
}

absl::StatusOr<GameSamples> SimulateGame(const GameConfig& cfg,
                                         SimulationMode mode, int threads) {
  if (absl::Status s = ValidateGameConfig(cfg); !s.ok()) return s;
  const DpSgdConfig& dp = cfg.config;
  const double n = static_cast<double>(dp.n_iters);
  const double full_shift = std::sqrt(n) / dp.sigma;
  const double shift_per_step = 1.0 / (dp.sigma * std::sqrt(n));

  std::optional<MixtureMaxSampler> mixture;
  if (mode == SimulationMode::kOrderStatistic && dp.tau < 1.0) {
    mixture.emplace(dp);
  }

  GameSamples samples;
  samples.truth.resize(cfg.trials);
  samples.score.resize(cfg.trials);
  ParallelFor(
      cfg.trials,
      [&](int64_t begin, int64_t end) {
        for (int64_t t = begin; t < end; ++t) {
          SplitMix64 gen =
              SplitMix64::ForStream(cfg.seed, static_cast<uint64_t>(t));
          const bool truth = (gen() >> 63) != 0;
          const int64_t k = cfg.dist.Sample(gen);
          double score;
          if (mode == SimulationMode::kOrderStatistic) {
            const double u = UniformOpen01(gen);
            if (!truth) {
              score = StandardMaxQuantile(u, k);
            } else if (!mixture) {
              score = full_shift + StandardMaxQuantile(u, k);
            } else {
              score = mixture->SampleMax(u, k);
            }
          } else {
            std::binomial_distribution<int64_t> steps(dp.n_iters, dp.tau);
            score = -kInfinity;
            for (int64_t r = 0; r < k; ++r) {
              double run = NormalQuantile(UniformOpen01(gen));
              if (truth) {
                const int64_t b = dp.tau == 1.0 ? dp.n_iters : steps(gen);
                run += static_cast<double>(b) * shift_per_step;
              }
              score = std::max(score, run);
            }
          }
          samples.truth[t] = truth ? 1 : 0;
          samples.score[t] = score;
        }
      },
      threads);
  return samples;
}

absl::StatusOr<double> ClopperPearsonUpper(int64_t successes, int64_t trials,
                                           double confidence) {
  if (trials < 1 || successes < 0 || successes > trials) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "need 0 <= successes <= trials and trials >= 1, got %d of %d",
        successes, trials));
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("confidence must lie in (0, 1), got %g", confidence));
  }
  if (successes == trials) return 1.0;
  return boost::math::ibeta_inv(static_cast<double>(successes + 1),
                                static_cast<double>(trials - successes),
                                confidence);
}

double EpsLowerBound(double fp, double fn, double delta) {
  double eps = 0.0;
  auto branch = [&](double numerator, double denominator) {
    if (!(numerator > 0.0)) return;
    if (denominator <= 0.0) {
      eps = kInfinity;
      return;
    }
    eps = std::max(eps, std::log(numerator / denominator));
  };
  branch(1.0 - delta - fp, fn);
  branch(1.0 - delta - fn, fp);
  return eps;
}

std::vector<double> ThresholdGrid(const std::vector<double>& sorted_scores) {
  const int64_t n = static_cast<int64_t>(sorted_scores.size());
  if (n == 0) return {};
  std::vector<double> levels;
  levels.reserve(512);
  for (int i = 0; i < 128; ++i) levels.push_back((i + 0.5) / 128.0);
  const double lo = std::max(1.0 / static_cast<double>(n), 1e-7);
  const double hi = 0.1;
  for (int j = 0; j < 192; ++j) {
    const double q = lo * std::pow(hi / lo, j / 191.0);
    levels.push_back(q);
    levels.push_back(1.0 - q);
  }
  std::sort(levels.begin(), levels.end());
  std::vector<double> thresholds;
  thresholds.reserve(levels.size());
  for (double q : levels) {
    const int64_t index = std::min<int64_t>(
        n - 1, static_cast<int64_t>(std::floor(q * static_cast<double>(n))));
    thresholds.push_back(sorted_scores[index]);
  }
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  return thresholds;
}

absl::StatusOr<AuditReport> ConcludeAudit(const GameSamples& samples,
                                          double confidence, double delta) {
  if (samples.truth.size() != samples.score.size()) {
    return absl::InvalidArgumentError("truth and score lengths differ");
  }
  std::vector<double> null_scores;
  std::vector<double> alt_scores;
  SplitSorted(samples, &null_scores, &alt_scores);
  const int64_t n0 = static_cast<int64_t>(null_scores.size());
  const int64_t n1 = static_cast<int64_t>(alt_scores.size());
  if (n0 == 0 || n1 == 0) {
    return absl::FailedPreconditionError(
        "both truth values must occur at least once");
  }
  std::vector<double> pooled(n0 + n1);
  std::merge(null_scores.begin(), null_scores.end(), alt_scores.begin(),
             alt_scores.end(), pooled.begin());

  AuditReport report;
  report.trials = n0 + n1;
  report.eps_lower = -1.0;
  for (double t : ThresholdGrid(pooled)) {
    const int64_t fp = CountAbove(null_scores, t);
    const int64_t fn = CountAtMost(alt_scores, t);
    absl::StatusOr<double> fp_upper = ClopperPearsonUpper(fp, n0, confidence);
    if (!fp_upper.ok()) return fp_upper.status();
    absl::StatusOr<double> fn_upper = ClopperPearsonUpper(fn, n1, confidence);
    if (!fn_upper.ok()) return fn_upper.status();
    ThresholdRow row;
    row.threshold = t;
    row.fp = static_cast<double>(fp) / static_cast<double>(n0);
    row.fn = static_cast<double>(fn) / static_cast<double>(n1);
    row.fp_upper = *fp_upper;
    row.fn_upper = *fn_upper;
    row.eps_lower = EpsLowerBound(*fp_upper, *fn_upper, delta);
    report.sweep.push_back(row);
    if (row.eps_lower > report.eps_lower) {
      report.eps_lower = row.eps_lower;
      report.best_threshold = t;
      report.false_positive = fp;
      report.true_negative = n0 - fp;
      report.false_negative = fn;
      report.true_positive = n1 - fn;
      report.fp_upper = row.fp_upper;
      report.fn_upper = row.fn_upper;
    }
  }
  return report;
}

absl::StatusOr<AuditReport> RunAudit(const GameConfig& cfg, SimulationMode mode,
                                     int threads) {
  absl::StatusOr<GameSamples> samples = SimulateGame(cfg, mode, threads);
  if (!samples.ok()) return samples.status();
  return ConcludeAudit(*samples, cfg.confidence, cfg.delta);
}

std::vector<RocPoint> EmpiricalRoc(const GameSamples& samples,
                                   const std::vector<double>& thresholds) {
  std::vector<double> null_scores;
  std::vector<double> alt_scores;
  SplitSorted(samples, &null_scores, &alt_scores);
  std::vector<RocPoint> roc;
  if (null_scores.empty() || alt_scores.empty()) return roc;
  roc.reserve(thresholds.size());
  for (double t : thresholds) {
    roc.push_back(
        {static_cast<double>(CountAbove(null_scores, t)) / null_scores.size(),
         static_cast<double>(CountAtMost(alt_scores, t)) / alt_scores.size()});
  }
  return roc;
}

double RocSupDistance(const std::vector<RocPoint>& roc,
                      const TradeoffCurve& curve) {
  double worst = 0.0;
  for (const RocPoint& p : roc) {
    worst = std::max(worst, std::abs(p.fn - curve(p.fp)));
  }
  return worst;
}

}  // namespace privsel
