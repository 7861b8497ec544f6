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

// Command-line front end for the privsel library.
//
// Subcommands: accountant, compare, audit, tightness, theorem4. Exit codes are
// 0 on success, 2 on usage or parameter errors, 3 when the requested epsilon
// is infinite and 4 when a property check fails.

#ifndef PRIVSEL_TOOLS_CLI_H_
#define PRIVSEL_TOOLS_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "privsel/runcount.h"
#include "privsel/tradeoff.h"

namespace privsel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfinite = 3;
inline constexpr int kExitPropertyViolation = 4;

enum class Subcommand { kAccountant, kCompare, kAudit, kTightness, kTheorem4 };
enum class OutputFormat { kJson, kCsv, kText };

// Everything a subcommand needs, filled in from the flags.
struct RunSpec {
  Subcommand subcommand = Subcommand::kAccountant;
  std::string base = "gdp:mu=1";
  std::string xi = "pointmass:k=1";
  double delta_h = 1e-5;
  OutputFormat format = OutputFormat::kText;
  uint64_t seed = 1;
  int64_t trials = 10'000'000;
  std::string out;  // Empty means standard output.

  // compare
  std::vector<double> eps_b_list = {1.0, 2.0, 4.0};
  std::vector<double> tau_list = {1.0};
  std::vector<std::string> xi_list;
  int64_t n_iters = 1000;
  bool with_audit = false;

  // audit
  double confidence = 0.95;
  bool per_run = false;
  std::string sweep_csv;

  // tightness
  std::string which = "pure";

  // theorem4
  int64_t instances = 1000;

  int threads = 0;
};

// Base mechanism descriptions accepted by --base.
struct GdpBase {
  double mu;
};
struct EpsDeltaBase {
  double epsilon;
  double delta;
};
struct DpSgdBase {
  DpSgdConfig config;
};
// DP-SGD whose noise multiplier is calibrated so that a single run is
// (eps, calib_delta)-DP under the RDP accountant.
struct CalibratedDpSgdBase {
  double epsilon;
  double tau;
  int64_t n_iters;
  double calib_delta;
};
using BaseSpec =
    std::variant<GdpBase, EpsDeltaBase, DpSgdBase, CalibratedDpSgdBase>;

// "gdp:mu=1", "epsdelta:eps=1,delta=1e-5", "dpsgd:sigma=2,tau=1,n=1000" or
// "dpsgd:eps=2,tau=1,n=1000[,calib_delta=1e-5]".
absl::StatusOr<BaseSpec> ParseBaseSpec(const std::string& spec);

// "pointmass:k=1" or "tnb:eta=1,nu=1e-2".
absl::StatusOr<RunCountDist> ParseRunCountSpec(const std::string& spec);

// Resolves calibrated DP-SGD bases into explicit configurations.
absl::StatusOr<DpSgdConfig> ResolveDpSgd(const BaseSpec& base);

// The trade-off curve modelling one run of the base mechanism.
absl::StatusOr<TradeoffCurve> BaseCurve(const BaseSpec& base);

// Runs one subcommand and writes its report to `out` (or spec.out).
int Execute(const RunSpec& spec, std::ostream& out, std::ostream& err);

// Parses argv with CLI11 and calls Execute.
int RunMain(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace privsel::cli

#endif  // PRIVSEL_TOOLS_CLI_H_
