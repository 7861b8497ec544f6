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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any selected criterion fails. Usage: acceptance [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "privsel/accountant.h"
#include "privsel/audit.h"
#include "privsel/discrete.h"
#include "privsel/runcount.h"
#include "privsel/tradeoff.h"

namespace privsel {
namespace {

// Collects the checks of one criterion.
class Checker {
 public:
  void Near(const std::string& what, double got, double want, double tol) {
    const bool ok = std::abs(got - want) <= tol;
    Record(ok,
           absl::StrFormat("%s=%.6g (want %.6g +- %g)", what, got, want, tol));
  }
  void Le(const std::string& what, double lhs, double rhs) {
    Record(lhs <= rhs, absl::StrFormat("%s: %.6g <= %.6g", what, lhs, rhs));
  }
  void True(const std::string& what, bool ok) { Record(ok, what); }

  bool ok() const { return failures_.empty(); }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  void Record(bool ok, std::string line) {
    if (!ok) failures_.push_back(line);
    notes_.push_back(std::move(line));
  }

  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

RunCountDist Tnb(double eta, double nu) {
  return *RunCountDist::TruncatedNegativeBinomial(eta, nu);
}

// The four run-count columns of the comparison table.
std::vector<RunCountDist> TableColumns() {
  return {Tnb(0.0, 1e-2), Tnb(1.0, 1e-2), Tnb(1.0, 1e-3), Tnb(2.0, 1e-3)};
}

constexpr int64_t kTableIters = 1000;
constexpr double kDelta = 1e-5;

double CalibratedSigma(double eps_b) {
  return *CalibrateNoiseMultiplier(eps_b, 1.0, kTableIters, kDelta);
}

struct ThreeSymbolSelection {
  FiniteMechanismPair pair;
  RunCountDist dist;
  std::vector<double> q;
  std::vector<double> q_prime;
};

ThreeSymbolSelection TunedThreeSymbol() {
  FiniteMechanismPair pair = *ThreeSymbolPair(1e-3, 100.0, 1.0);
  RunCountDist dist = Tnb(1.0, 1e-3);
  std::vector<double> q =
      *SelectionDistribution(pair.p(), pair.partition(), dist);
  std::vector<double> q_prime =
      *SelectionDistribution(pair.p_prime(), pair.partition(), dist);
  return {std::move(pair), std::move(dist), std::move(q), std::move(q_prime)};
}

bool SameToThreeFigures(double a, double b) {
  return absl::StrFormat("%.2e", a) == absl::StrFormat("%.2e", b);
}

double Elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

void CheckRuntime(Checker& c, std::chrono::steady_clock::time_point start,
                  double limit) {
  const double seconds = Elapsed(start);
  c.True(absl::StrFormat("runtime %.2fs < %gs", seconds, limit),
         seconds < limit);
}

void Criterion1(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  const ThreeSymbolSelection ex = TunedThreeSymbol();
  const double want_q[] = {8.66e-3, 2.60e-4, 9.91e-1};
  const double want_qp[] = {2.66e-3, 1.34e-5, 9.97e-1};
  for (int i = 0; i < 3; ++i) {
    const std::string s = ex.pair.alphabet()[i];
    c.True(absl::StrFormat("q_%s=%.4e ~ %.2e", s, ex.q[i], want_q[i]),
           SameToThreeFigures(ex.q[i], want_q[i]));
    c.True(absl::StrFormat("q'_%s=%.4e ~ %.2e", s, ex.q_prime[i], want_qp[i]),
           SameToThreeFigures(ex.q_prime[i], want_qp[i]));
  }
  const double eps = PureDpEpsilon(ex.q, ex.q_prime);
  c.Near("eps_tuned", eps, 2.96, 0.005);
  const double generic = (2.0 + ex.dist.tnb()->eta) *
                         PureDpEpsilon(ex.pair.p(), ex.pair.p_prime());
  c.Near("generic_bound", generic, 3.0, 1e-12);
  c.Le("eps_tuned vs generic", eps, generic);
  CheckRuntime(c, start, 1.0);
}

void Criterion2(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  const ThreeSymbolSelection ex = TunedThreeSymbol();
  c.Near("eps_tuned(delta=1e-5)", ApproxDpEpsilon(ex.q, ex.q_prime, kDelta),
         2.92, 0.005);
  const double pure_base = PureDpEpsilon(ex.pair.p(), ex.pair.p_prime());
  const AccountantReport prior = *SelectEpsilonRdp(
      [pure_base](double) { return absl::StatusOr<double>(pure_base); },
      ex.dist, kDelta);
  c.Near("prior_prediction", prior.eps_h, 3.11, 0.01);
  CheckRuntime(c, start, 1.0);
}

void Criterion3(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  const TradeoffCurve g1 = *TradeoffCurve::FromGaussian(1.0);
  const RunCountDist geo = *RunCountDist::Geometric(1e-2);
  c.Near("fdp_to_eps_delta(G_1,1e-5)", *FdpToEpsDelta(g1, kDelta), 4.36, 0.01);
  c.Near("log_ratio_max(G_1)", MaxLogOmegaRatio(g1, geo).value, 3.3, 0.05);
  c.Near(
      "log_ratio_max(f_{4.36,1e-5})",
      MaxLogOmegaRatio(*TradeoffCurve::FromEpsDelta(4.36, kDelta), geo).value,
      16.5, 0.1);
  CheckRuntime(c, start, 1.0);
}

void Criterion4(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  const double eps_bs[] = {1.0, 2.0, 4.0};
  const double ours[3][4] = {{1.55, 2.06, 2.54, 3.18},
                             {2.92, 3.84, 4.69, 5.85},
                             {5.70, 7.40, 8.95, 11.07}};
  const double prior[3][4] = {{1.86, 2.65, 3.09, 3.99},
                              {3.61, 5.06, 5.89, 7.57},
                              {6.80, 9.30, 10.83, 13.77}};
  const std::vector<RunCountDist> columns = TableColumns();
  for (int row = 0; row < 3; ++row) {
    const DpSgdConfig config =
        *DpSgdConfig::Create(CalibratedSigma(eps_bs[row]), 1.0, kTableIters);
    for (int col = 0; col < 4; ++col) {
      const BoundComparison cell = *CompareBounds(config, columns[col], kDelta);
      const std::string where =
          absl::StrCat("eps_b=", eps_bs[row], " ", columns[col].DebugString());
      c.Near(absl::StrCat("ours[", where, "]"), cell.ours.eps_h, ours[row][col],
             0.1);
      c.Near(absl::StrCat("prior[", where, "]"), cell.prior->eps_h,
             prior[row][col], 0.15);
    }
  }
  CheckRuntime(c, start, 10.0);
}

struct AuditCase {
  double eps_b;
  RunCountDist dist;
  double want;
};

std::vector<AuditCase> AuditCases() {
  return {{2.0, Tnb(1.0, 1e-2), 2.21}, {1.0, Tnb(0.0, 1e-2), 1.17}};
}

struct AuditOutcome {
  double eps_lower;
  double eps_ours;
};

AuditOutcome PlayAudit(const AuditCase& a) {
  GameConfig game;
  game.config =
      *DpSgdConfig::Create(CalibratedSigma(a.eps_b), 1.0, kTableIters);
  game.dist = a.dist;
  game.trials = 10'000'000;
  game.seed = 1;
  game.delta = kDelta;
  const AuditReport report = *RunAudit(game);
  const double ours =
      SelectEpsilonFdp(*TradeoffCurve::FromGaussian(*DpSgdMu(game.config)),
                       a.dist, kDelta)
          ->eps_h;
  return {report.eps_lower, ours};
}

void Criterion5(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  for (const AuditCase& a : AuditCases()) {
    const AuditOutcome o = PlayAudit(a);
    const std::string where =
        absl::StrCat("eps_b=", a.eps_b, " ", a.dist.DebugString());
    c.Near(absl::StrCat("eps_lower[", where, "]"), o.eps_lower, a.want, 0.15);
    c.True(absl::StrFormat("eps_lower[%s] > eps_b", where),
           o.eps_lower > a.eps_b);
    c.True(absl::StrFormat("eps_lower[%s] < eps_ours %.6g", where, o.eps_ours),
           o.eps_lower < o.eps_ours);
  }
  CheckRuntime(c, start, 600.0);
}

void Criterion6(Checker& c) {
  const std::vector<RunCountDist> columns = TableColumns();
  for (double eps_b : {1.0, 2.0, 4.0}) {
    const DpSgdConfig config =
        *DpSgdConfig::Create(CalibratedSigma(eps_b), 1.0, kTableIters);
    for (const RunCountDist& dist : columns) {
      const BoundComparison cell = *CompareBounds(config, dist, kDelta);
      const std::string where =
          absl::StrCat("eps_b=", eps_b, " ", dist.DebugString());
      c.Le(absl::StrCat("eps_b <= ours [", where, "]"), eps_b, cell.ours.eps_h);
      c.Le(absl::StrCat("ours <= prior [", where, "]"), cell.ours.eps_h,
           cell.prior->eps_h);
    }
  }
  for (const AuditCase& a : AuditCases()) {
    const AuditOutcome o = PlayAudit(a);
    c.Le(absl::StrCat("eps_lower <= ours [eps_b=", a.eps_b, " ",
                      a.dist.DebugString(), "]"),
         o.eps_lower, o.eps_ours);
  }
}

void Criterion7(Checker& c) {
  const auto start = std::chrono::steady_clock::now();
  const CampaignResult result = *RunRefinementCampaign(1000, 7);
  c.True(absl::StrFormat("%d/%d instances hold (worst gap %.3g)", result.passed,
                         result.instances, result.worst_gap),
         result.instances == 1000 && result.passed == 1000);
  CheckRuntime(c, start, 60.0);
}

void Criterion8(Checker& c) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const RunCountDist one = *RunCountDist::FromPointMass(1);
  int exact = 0;
  for (int i = 0; i < 20; ++i) {
    const TradeoffCurve curve =
        i % 2 == 0
            ? *TradeoffCurve::FromGaussian(0.1 + 4.9 * unit(gen))
            : *TradeoffCurve::FromEpsDelta(
                  5.0 * unit(gen), std::pow(10.0, -7.0 + 5.0 * unit(gen)));
    const double delta = std::pow(10.0, -6.0 + 4.0 * unit(gen));
    const AccountantReport report = *SelectEpsilonFdp(curve, one, delta);
    const absl::StatusOr<double> base = FdpToEpsDelta(curve, delta);
    const bool same =
        base.ok() && (report.eps_h == *base ||
                      (std::isinf(report.eps_h) && std::isinf(*base)));
    if (same && report.log_ratio == 0.0)
      ++exact;
    else
      c.True(absl::StrCat("identity for ", curve.DebugString()), false);
  }
  c.True(absl::StrFormat("%d/20 curves give eps_h == base and log_ratio == 0",
                         exact),
         exact == 20);
}

void Criterion9(Checker& c) {
  for (auto [sigma, n_iters] : std::vector<std::pair<double, int64_t>>{
           {1.0, 1}, {CalibratedSigma(2.0), kTableIters}}) {
    GameConfig game;
    game.config = *DpSgdConfig::Create(sigma, 1.0, n_iters);
    game.trials = 10'000'000;
    game.seed = 9;
    const GameSamples samples = *SimulateGame(game);
    std::vector<double> sorted = samples.score;
    std::sort(sorted.begin(), sorted.end());
    const double mu = std::sqrt(static_cast<double>(n_iters)) / sigma;
    const double sup =
        RocSupDistance(EmpiricalRoc(samples, ThresholdGrid(sorted)),
                       *TradeoffCurve::FromGaussian(mu));
    c.Le(absl::StrFormat("roc sup distance to G_%.4g", mu), sup, 0.005);
  }
  const ThreeSymbolSelection ex = TunedThreeSymbol();
  const RunCountDist dist = Tnb(1.0, 1e-2);
  constexpr int64_t kTrials = 1'000'000;
  for (const std::vector<double>* side : {&ex.pair.p(), &ex.pair.p_prime()}) {
    const std::vector<double> exact =
        *SelectionDistribution(*side, ex.pair.partition(), dist);
    const std::vector<double> mc =
        *SimulateSelection(*side, ex.pair.partition(), dist, kTrials, 9);
    for (size_t y = 0; y < exact.size(); ++y) {
      const double se = std::sqrt(exact[y] * (1.0 - exact[y]) / kTrials);
      c.True(
          absl::StrFormat("selection mc %.6g vs exact %.6g within 4 se (%.3g)",
                          mc[y], exact[y], se),
          std::abs(mc[y] - exact[y]) <= 4.0 * se);
    }
  }
}

const std::vector<std::pair<std::string, std::function<void(Checker&)>>>&
Criteria() {
  static const auto* criteria =
      new std::vector<std::pair<std::string, std::function<void(Checker&)>>>{
          {"three-symbol pure-DP tightness", Criterion1},
          {"approximate-DP tightness", Criterion2},
          {"Gaussian log-ratio components", Criterion3},
          {"full-batch table upper bounds", Criterion4},
          {"audit reproduction", Criterion5},
          {"soundness ordering", Criterion6},
          {"score refinement campaign", Criterion7},
          {"point-mass identity", Criterion8},
          {"simulator calibration", Criterion9},
  };
  return *criteria;
}

}  // namespace
}  // namespace privsel

int main(int argc, char** argv) {
  const auto& criteria = privsel::Criteria();
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (size_t i = 1; i <= criteria.size(); ++i) selected.push_back(i);
  }
  int failed = 0;
  for (int n : selected) {
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %d\n", n);
      return 2;
    }
    privsel::Checker checker;
    const auto start = std::chrono::steady_clock::now();
    criteria[n - 1].second(checker);
    for (const std::string& note : checker.notes()) {
      std::printf("  %s\n", note.c_str());
    }
    std::printf("%s criterion %d: %s (%.2fs)%s\n",
                checker.ok() ? "PASS" : "FAIL", n,
                criteria[n - 1].first.c_str(), privsel::Elapsed(start),
                checker.ok()
                    ? ""
                    : absl::StrCat(" -- ", checker.failures().front()).c_str());
    if (!checker.ok()) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
