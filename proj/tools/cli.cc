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

#include "cli.h"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "json.hpp"
#include "privsel/accountant.h"
#include "privsel/audit.h"
#include "privsel/discrete.h"

namespace privsel::cli {
namespace {

using Json = nlohmann::json;

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Spec strings of the form "kind:key=value,key=value".

class SpecFields {
 public:
  static absl::StatusOr<SpecFields> Parse(const std::string& spec,
                                          const char* flag) {
    SpecFields fields;
    fields.spec_ = spec;
    fields.flag_ = flag;
    const size_t colon = spec.find(':');
    fields.kind_ = spec.substr(0, colon);
    if (fields.kind_.empty()) {
      return fields.Error(absl::StrCat("missing kind before ':'"));
    }
    if (colon == std::string::npos) return fields;
    for (absl::string_view token :
         absl::StrSplit(absl::string_view(spec).substr(colon + 1), ',')) {
      const size_t eq = token.find('=');
      if (eq == absl::string_view::npos || eq == 0) {
        return fields.Error(
            absl::StrCat("token '", token, "' is not of the form key=value"));
      }
      std::string key(token.substr(0, eq));
      if (fields.values_.count(key) > 0) {
        return fields.Error(absl::StrCat("key '", key, "' given twice"));
      }
      fields.values_[key] = std::string(token.substr(eq + 1));
    }
    return fields;
  }

  const std::string& kind() const { return kind_; }
  bool Has(const std::string& key) const { return values_.count(key) > 0; }

  absl::StatusOr<double> Double(const std::string& key) {
    absl::StatusOr<std::string> raw = Take(key);
    if (!raw.ok()) return raw.status();
    double value;
    if (!absl::SimpleAtod(*raw, &value) || !std::isfinite(value)) {
      return Error(
          absl::StrCat("token '", key, "=", *raw, "' is not a finite number"));
    }
    return value;
  }

  absl::StatusOr<int64_t> Int(const std::string& key) {
    absl::StatusOr<std::string> raw = Take(key);
    if (!raw.ok()) return raw.status();
    int64_t value;
    if (!absl::SimpleAtoi(*raw, &value)) {
      return Error(
          absl::StrCat("token '", key, "=", *raw, "' is not an integer"));
    }
    return value;
  }

  // Fails on keys that were never read.
  absl::Status Finish() const {
    for (const auto& [key, value] : values_) {
      if (used_.count(key) == 0) {
        return Error(
            absl::StrCat("unknown key in token '", key, "=", value, "'"));
      }
    }
    return absl::OkStatus();
  }

  absl::Status Error(absl::string_view message) const {
    return absl::InvalidArgumentError(
        absl::StrCat("bad ", flag_, " spec '", spec_, "': ", message));
  }

 private:
  absl::StatusOr<std::string> Take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) {
      std::string message = absl::StrCat("missing key '", key, "'");
      for (const auto& [other, value] : values_) {
        if (used_.count(other) == 0) {
          absl::StrAppend(&message, "; unrecognised token '", other, "=", value,
                          "'");
        }
      }
      return Error(message);
    }
    used_[key] = true;
    return it->second;
  }

  std::string spec_;
  std::string flag_;
  std::string kind_;
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> used_;
};

// Applies the validating factory and attaches the spec text to its error.
template <typename T>
absl::StatusOr<T> WithSpec(absl::StatusOr<T> value, const SpecFields& fields) {
  if (!value.ok()) return fields.Error(value.status().message());
  return value;
}

// ---------------------------------------------------------------------------
// Formatting.

std::string Num(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return absl::StrFormat("%.6g", x);
}

Json JsonNum(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

// An ordered list of (name, value) pairs rendered in any output format.
class Record {
 public:
  Record& Add(const std::string& name, double value) {
    fields_.push_back({name, Num(value), JsonNum(value)});
    return *this;
  }
  Record& AddInt(const std::string& name, int64_t value) {
    fields_.push_back({name, absl::StrCat(value), Json(value)});
    return *this;
  }
  Record& AddString(const std::string& name, const std::string& value) {
    fields_.push_back({name, value, Json(value)});
    return *this;
  }
  Record& AddBool(const std::string& name, bool value) {
    fields_.push_back({name, value ? "true" : "false", Json(value)});
    return *this;
  }

  std::vector<std::string> Names() const {
    std::vector<std::string> names;
    for (const Field& f : fields_) names.push_back(f.name);
    return names;
  }
  std::vector<std::string> Texts() const {
    std::vector<std::string> texts;
    for (const Field& f : fields_) texts.push_back(f.text);
    return texts;
  }
  Json ToJson() const {
    Json j = Json::object();
    for (const Field& f : fields_) j[f.name] = f.json;
    return j;
  }
  void WriteText(std::ostream& out) const {
    for (const Field& f : fields_) out << f.name << ": " << f.text << "\n";
  }

 private:
  struct Field {
    std::string name;
    std::string text;
    Json json;
  };
  std::vector<Field> fields_;
};

std::string CsvCell(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string quoted = "\"";
  for (char c : cell) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

void WriteCsv(std::ostream& out, const std::vector<std::string>& header,
              const std::vector<Record>& rows) {
  auto line = [&out](const std::vector<std::string>& cells) {
    std::vector<std::string> escaped;
    for (const std::string& c : cells) escaped.push_back(CsvCell(c));
    out << absl::StrJoin(escaped, ",") << "\n";
  };
  line(header);
  for (const Record& r : rows) line(r.Texts());
}

void WriteJson(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

void WriteRecord(std::ostream& out, OutputFormat format, const Record& r) {
  switch (format) {
    case OutputFormat::kJson:
      WriteJson(out, r.ToJson());
      break;
    case OutputFormat::kCsv:
      WriteCsv(out, r.Names(), {r});
      break;
    case OutputFormat::kText:
      r.WriteText(out);
      break;
  }
}

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kOutOfRange:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

int Fail(std::ostream& err, const absl::Status& status) {
  err << "error: " << status.message() << "\n";
  return ExitCodeFor(status);
}

// ---------------------------------------------------------------------------
// Subcommands.

int RunAccountant(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  absl::StatusOr<BaseSpec> base = ParseBaseSpec(spec.base);
  if (!base.ok()) return Fail(err, base.status());
  absl::StatusOr<RunCountDist> dist = ParseRunCountSpec(spec.xi);
  if (!dist.ok()) return Fail(err, dist.status());
  absl::StatusOr<TradeoffCurve> curve = BaseCurve(*base);
  if (!curve.ok()) return Fail(err, curve.status());
  absl::StatusOr<AccountantReport> report =
      SelectEpsilonFdp(*curve, *dist, spec.delta_h);
  if (!report.ok()) return Fail(err, report.status());

  const double omega_one = dist->Omega(1.0);
  Record r;
  r.AddString("method", std::string(BoundMethodName(report->method)))
      .AddString("base", spec.base)
      .AddString("curve", curve->DebugString())
      .AddString("xi", dist->DebugString())
      .Add("omega_one", omega_one)
      .Add("delta_h", report->delta_h)
      .Add("delta_base", report->delta_h / omega_one)
      .Add("eps_base", report->eps_base)
      .Add("log_ratio", report->log_ratio)
      .Add("argmax_a", report->argmax_a)
      .Add("eps_h", report->eps_h);
  WriteRecord(out, spec.format, r);
  if (!std::isfinite(report->eps_h)) {
    err << "epsilon is infinite: delta_h / omega(1) is below 1 - f(0)\n";
    return kExitInfinite;
  }
  return kExitOk;
}

int RunCompare(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  std::vector<RunCountDist> dists;
  for (const std::string& xi : spec.xi_list) {
    absl::StatusOr<RunCountDist> dist = ParseRunCountSpec(xi);
    if (!dist.ok()) return Fail(err, dist.status());
    dists.push_back(*std::move(dist));
  }
  std::vector<std::string> header = {"eps_b", "tau",   "eta",      "nu",
                                     "E_xi",  "sigma", "eps_ours", "eps_prior"};
  if (spec.with_audit) header.push_back("eps_lower");
  header.push_back("reason");

  std::vector<Record> rows;
  for (double eps_b : spec.eps_b_list) {
    for (double tau : spec.tau_list) {
      absl::StatusOr<double> sigma =
          dists.empty() ? absl::StatusOr<double>(0.0)
                        : CalibrateNoiseMultiplier(eps_b, tau, spec.n_iters,
                                                   spec.delta_h);
      for (const RunCountDist& dist : dists) {
        const RunCountDist::Tnb* tnb = dist.tnb();
        double eps_ours = std::nan("");
        double eps_prior = std::nan("");
        double eps_lower = std::nan("");
        std::vector<std::string> reasons;
        if (!sigma.ok()) {
          reasons.push_back(std::string(sigma.status().message()));
        } else {
          DpSgdConfig config{*sigma, tau, spec.n_iters};
          absl::StatusOr<double> mu = DpSgdMu(config);
          absl::StatusOr<TradeoffCurve> curve =
              mu.ok() ? TradeoffCurve::FromGaussian(*mu)
                      : absl::StatusOr<TradeoffCurve>(mu.status());
          absl::StatusOr<AccountantReport> ours =
              curve.ok() ? SelectEpsilonFdp(*curve, dist, spec.delta_h)
                         : absl::StatusOr<AccountantReport>(curve.status());
          if (ours.ok()) {
            eps_ours = ours->eps_h;
          } else {
            reasons.push_back(absl::StrCat("ours: ", ours.status().message()));
          }
          absl::StatusOr<AccountantReport> prior =
              SelectEpsilonRdp(config, dist, spec.delta_h);
          if (prior.ok()) {
            eps_prior = prior->eps_h;
          } else {
            reasons.push_back(
                absl::StrCat("prior: ", prior.status().message()));
          }
          if (spec.with_audit) {
            GameConfig game;
            game.config = config;
            game.dist = dist;
            game.trials = spec.trials;
            game.seed = spec.seed;
            game.confidence = spec.confidence;
            game.delta = spec.delta_h;
            absl::StatusOr<AuditReport> audit =
                RunAudit(game, SimulationMode::kOrderStatistic, spec.threads);
            if (audit.ok()) {
              eps_lower = audit->eps_lower;
            } else {
              reasons.push_back(
                  absl::StrCat("audit: ", audit.status().message()));
            }
          }
        }
        Record r;
        r.Add("eps_b", eps_b)
            .Add("tau", tau)
            .Add("eta", tnb ? tnb->eta : std::nan(""))
            .Add("nu", tnb ? tnb->nu : std::nan(""))
            .Add("E_xi", dist.Mean())
            .Add("sigma", sigma.ok() ? *sigma : std::nan(""))
            .Add("eps_ours", eps_ours)
            .Add("eps_prior", eps_prior);
        if (spec.with_audit) r.Add("eps_lower", eps_lower);
        r.AddString("reason", absl::StrJoin(reasons, "; "));
        rows.push_back(std::move(r));
      }
    }
  }

  switch (spec.format) {
    case OutputFormat::kJson: {
      Json j = Json::array();
      for (const Record& r : rows) j.push_back(r.ToJson());
      WriteJson(out, j);
      break;
    }
    case OutputFormat::kCsv:
      WriteCsv(out, header, rows);
      break;
    case OutputFormat::kText: {
      out << absl::StrJoin(header, "\t") << "\n";
      for (const Record& r : rows) {
        out << absl::StrJoin(r.Texts(), "\t") << "\n";
      }
      break;
    }
  }
  return kExitOk;
}

// DP-SGD parameters of the game. A GDP base mu is played as a single full
// batch step with sigma = 1/mu.
absl::StatusOr<DpSgdConfig> AuditConfigFor(const BaseSpec& base) {
  if (const auto* gdp = std::get_if<GdpBase>(&base)) {
    if (!(gdp->mu > 0.0)) {
      return absl::InvalidArgumentError("audit needs a GDP base with mu > 0");
    }
    return DpSgdConfig::Create(1.0 / gdp->mu, 1.0, 1);
  }
  if (std::holds_alternative<EpsDeltaBase>(base)) {
    return absl::InvalidArgumentError(
        "audit needs a dpsgd or gdp base, not epsdelta");
  }
  return ResolveDpSgd(base);
}

int RunAuditCommand(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  absl::StatusOr<BaseSpec> base = ParseBaseSpec(spec.base);
  if (!base.ok()) return Fail(err, base.status());
  absl::StatusOr<RunCountDist> dist = ParseRunCountSpec(spec.xi);
  if (!dist.ok()) return Fail(err, dist.status());
  absl::StatusOr<DpSgdConfig> config = AuditConfigFor(*base);
  if (!config.ok()) return Fail(err, config.status());

  GameConfig game;
  game.config = *config;
  game.dist = *dist;
  game.trials = spec.trials;
  game.seed = spec.seed;
  game.confidence = spec.confidence;
  game.delta = spec.delta_h;
  if (absl::Status s = ValidateGameConfig(game); !s.ok()) return Fail(err, s);

  absl::StatusOr<double> mu = DpSgdMu(*config);
  if (!mu.ok()) return Fail(err, mu.status());
  absl::StatusOr<TradeoffCurve> curve = TradeoffCurve::FromGaussian(*mu);
  if (!curve.ok()) return Fail(err, curve.status());
  absl::StatusOr<AccountantReport> upper =
      SelectEpsilonFdp(*curve, *dist, spec.delta_h);
  if (!upper.ok()) return Fail(err, upper.status());

  absl::StatusOr<AuditReport> report = RunAudit(
      game,
      spec.per_run ? SimulationMode::kPerRun : SimulationMode::kOrderStatistic,
      spec.threads);
  if (!report.ok()) return Fail(err, report.status());
  const bool sound = report->eps_lower <= upper->eps_h;

  std::vector<std::string> sweep_header = {
      "threshold", "fp", "fn", "fp_upper", "fn_upper", "eps_lower"};
  std::vector<Record> sweep_rows;
  for (const ThresholdRow& row : report->sweep) {
    Record r;
    r.Add("threshold", row.threshold)
        .Add("fp", row.fp)
        .Add("fn", row.fn)
        .Add("fp_upper", row.fp_upper)
        .Add("fn_upper", row.fn_upper)
        .Add("eps_lower", row.eps_lower);
    sweep_rows.push_back(std::move(r));
  }
  if (!spec.sweep_csv.empty()) {
    std::ofstream file(spec.sweep_csv);
    if (!file) {
      return Fail(err, absl::InvalidArgumentError(absl::StrCat(
                           "cannot open ", spec.sweep_csv, " for writing")));
    }
    WriteCsv(file, sweep_header, sweep_rows);
  }

  Record r;
  r.AddString("base", spec.base)
      .Add("sigma", config->sigma)
      .Add("tau", config->tau)
      .AddInt("n_iters", config->n_iters)
      .Add("mu", *mu)
      .AddString("xi", dist->DebugString())
      .AddInt("trials", report->trials)
      .AddString("seed", absl::StrCat(spec.seed))
      .Add("confidence", spec.confidence)
      .Add("delta", spec.delta_h)
      .Add("best_threshold", report->best_threshold)
      .AddInt("true_positive", report->true_positive)
      .AddInt("false_positive", report->false_positive)
      .AddInt("true_negative", report->true_negative)
      .AddInt("false_negative", report->false_negative)
      .Add("fp_upper", report->fp_upper)
      .Add("fn_upper", report->fn_upper)
      .Add("eps_lower", report->eps_lower)
      .Add("eps_upper", upper->eps_h)
      .AddBool("lower_below_upper", sound);
  switch (spec.format) {
    case OutputFormat::kJson: {
      Json j = r.ToJson();
      Json rows = Json::array();
      for (const Record& row : sweep_rows) rows.push_back(row.ToJson());
      j["sweep"] = rows;
      WriteJson(out, j);
      break;
    }
    case OutputFormat::kCsv:
      WriteCsv(out, sweep_header, sweep_rows);
      break;
    case OutputFormat::kText:
      r.WriteText(out);
      break;
  }
  if (!sound) {
    err << "property violation: eps_lower exceeds the f-DP upper bound\n";
    return kExitPropertyViolation;
  }
  return kExitOk;
}

int RunTightness(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  constexpr double kEpsilon = 1.0;
  constexpr double kDelta = 1e-5;
  absl::StatusOr<FiniteMechanismPair> pair =
      ThreeSymbolPair(1e-3, 100.0, kEpsilon);
  if (!pair.ok()) return Fail(err, pair.status());
  absl::StatusOr<RunCountDist> dist = RunCountDist::Geometric(1e-3);
  if (!dist.ok()) return Fail(err, dist.status());
  absl::StatusOr<std::vector<double>> q =
      SelectionDistribution(pair->p(), pair->partition(), *dist);
  if (!q.ok()) return Fail(err, q.status());
  absl::StatusOr<std::vector<double>> q_prime =
      SelectionDistribution(pair->p_prime(), pair->partition(), *dist);
  if (!q_prime.ok()) return Fail(err, q_prime.status());

  Record r;
  r.AddString("xi", dist->DebugString());
  for (int i = 0; i < pair->size(); ++i) {
    r.Add(absl::StrCat("p_", pair->alphabet()[i]), pair->p()[i]);
  }
  for (int i = 0; i < pair->size(); ++i) {
    r.Add(absl::StrCat("p_prime_", pair->alphabet()[i]), pair->p_prime()[i]);
  }
  for (int i = 0; i < pair->size(); ++i) {
    r.Add(absl::StrCat("q_", pair->alphabet()[i]), (*q)[i]);
  }
  for (int i = 0; i < pair->size(); ++i) {
    r.Add(absl::StrCat("q_prime_", pair->alphabet()[i]), (*q_prime)[i]);
  }

  bool ok = true;
  if (spec.which == "pure") {
    const double eps_base = PureDpEpsilon(pair->p(), pair->p_prime());
    const double eps_tuned = PureDpEpsilon(*q, *q_prime);
    // A pure eps-DP base run through TNB(eta, nu) is (2 + eta) eps-DP.
    const double generic = (2.0 + dist->tnb()->eta) * eps_base;
    int argmax = 0;
    for (int i = 1; i < pair->size(); ++i) {
      if (std::abs(std::log((*q)[i] / (*q_prime)[i])) >
          std::abs(std::log((*q)[argmax] / (*q_prime)[argmax]))) {
        argmax = i;
      }
    }
    r.Add("eps_base", eps_base)
        .Add("eps_tuned", eps_tuned)
        .AddString("argmax_symbol", pair->alphabet()[argmax])
        .Add("generic_bound", generic)
        .Add("gap", generic - eps_tuned);
    ok = eps_tuned <= generic;
  } else if (spec.which == "approx") {
    const double eps_base = ApproxDpEpsilon(pair->p(), pair->p_prime(), kDelta);
    const double eps_tuned = ApproxDpEpsilon(*q, *q_prime, kDelta);
    const double pure_base = PureDpEpsilon(pair->p(), pair->p_prime());
    // A pure eps-DP mechanism is (alpha, eps)-RDP for every alpha.
    absl::StatusOr<AccountantReport> prior = SelectEpsilonRdp(
        [pure_base](double) { return absl::StatusOr<double>(pure_base); },
        *dist, kDelta);
    if (!prior.ok()) return Fail(err, prior.status());
    r.Add("delta", kDelta)
        .Add("eps_base", eps_base)
        .Add("eps_tuned", eps_tuned)
        .Add("eps_prior", prior->eps_h)
        .Add("alpha", prior->alpha)
        .Add("alpha_prime", prior->alpha_prime)
        .Add("gap", prior->eps_h - eps_tuned);
    ok = eps_tuned <= prior->eps_h;
  } else {
    return Fail(err,
                absl::InvalidArgumentError(absl::StrCat(
                    "--which must be pure or approx, got '", spec.which, "'")));
  }
  WriteRecord(out, spec.format, r);
  if (!ok) {
    err << "property violation: tuned epsilon exceeds the generic bound\n";
    return kExitPropertyViolation;
  }
  return kExitOk;
}

int RunTheorem4(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  absl::StatusOr<CampaignResult> result =
      RunRefinementCampaign(spec.instances, spec.seed, spec.threads);
  if (!result.ok()) return Fail(err, result.status());
  Record r;
  r.AddInt("instances", result->instances)
      .AddInt("passed", result->passed)
      .AddString("seed", absl::StrCat(spec.seed))
      .Add("worst_gap", result->worst_gap)
      .AddBool("all_pass", result->passed == result->instances);
  if (spec.format == OutputFormat::kJson) {
    Json j = r.ToJson();
    j["failures"] = result->failures;
    WriteJson(out, j);
  } else {
    WriteRecord(out, spec.format, r);
    for (const std::string& f : result->failures) err << f << "\n";
  }
  if (result->passed != result->instances) {
    err << "property violation: " << result->instances - result->passed
        << " instance(s) failed\n";
    return kExitPropertyViolation;
  }
  return kExitOk;
}

}  // namespace

absl::StatusOr<BaseSpec> ParseBaseSpec(const std::string& spec) {
  absl::StatusOr<SpecFields> fields = SpecFields::Parse(spec, "--base");
  if (!fields.ok()) return fields.status();
  BaseSpec result;
  if (fields->kind() == "gdp") {
    absl::StatusOr<double> mu = fields->Double("mu");
    if (!mu.ok()) return mu.status();
    if (!(*mu >= 0.0)) return fields->Error("mu must be >= 0");
    result = GdpBase{*mu};
  } else if (fields->kind() == "epsdelta") {
    absl::StatusOr<double> eps = fields->Double("eps");
    if (!eps.ok()) return eps.status();
    absl::StatusOr<double> delta = fields->Double("delta");
    if (!delta.ok()) return delta.status();
    absl::StatusOr<TradeoffCurve> check =
        WithSpec(TradeoffCurve::FromEpsDelta(*eps, *delta), *fields);
    if (!check.ok()) return check.status();
    result = EpsDeltaBase{*eps, *delta};
  } else if (fields->kind() == "dpsgd") {
    absl::StatusOr<double> tau = fields->Double("tau");
    if (!tau.ok()) return tau.status();
    absl::StatusOr<int64_t> n = fields->Int("n");
    if (!n.ok()) return n.status();
    if (fields->Has("sigma")) {
      absl::StatusOr<double> sigma = fields->Double("sigma");
      if (!sigma.ok()) return sigma.status();
      absl::StatusOr<DpSgdConfig> config =
          WithSpec(DpSgdConfig::Create(*sigma, *tau, *n), *fields);
      if (!config.ok()) return config.status();
      result = DpSgdBase{*config};
    } else if (fields->Has("eps")) {
      absl::StatusOr<double> eps = fields->Double("eps");
      if (!eps.ok()) return eps.status();
      double calib_delta = 1e-5;
      if (fields->Has("calib_delta")) {
        absl::StatusOr<double> d = fields->Double("calib_delta");
        if (!d.ok()) return d.status();
        calib_delta = *d;
      }
      // Validate tau and n up front with a placeholder sigma.
      absl::StatusOr<DpSgdConfig> check =
          WithSpec(DpSgdConfig::Create(1.0, *tau, *n), *fields);
      if (!check.ok()) return check.status();
      result = CalibratedDpSgdBase{*eps, *tau, *n, calib_delta};
    } else {
      return fields->Error("dpsgd needs either sigma=<r> or eps=<r>");
    }
  } else {
    return fields->Error(absl::StrCat("unknown kind '", fields->kind(),
                                      "' (expected gdp, epsdelta or dpsgd)"));
  }
  if (absl::Status s = fields->Finish(); !s.ok()) return s;
  return result;
}

absl::StatusOr<RunCountDist> ParseRunCountSpec(const std::string& spec) {
  absl::StatusOr<SpecFields> fields = SpecFields::Parse(spec, "--xi");
  if (!fields.ok()) return fields.status();
  absl::StatusOr<RunCountDist> dist = absl::InvalidArgumentError("unreachable");
  if (fields->kind() == "pointmass") {
    absl::StatusOr<int64_t> k = fields->Int("k");
    if (!k.ok()) return k.status();
    dist = WithSpec(RunCountDist::FromPointMass(*k), *fields);
  } else if (fields->kind() == "tnb") {
    absl::StatusOr<double> eta = fields->Double("eta");
    if (!eta.ok()) return eta.status();
    absl::StatusOr<double> nu = fields->Double("nu");
    if (!nu.ok()) return nu.status();
    dist =
        WithSpec(RunCountDist::TruncatedNegativeBinomial(*eta, *nu), *fields);
  } else {
    return fields->Error(absl::StrCat("unknown kind '", fields->kind(),
                                      "' (expected pointmass or tnb)"));
  }
  if (!dist.ok()) return dist.status();
  if (absl::Status s = fields->Finish(); !s.ok()) return s;
  return dist;
}

absl::StatusOr<DpSgdConfig> ResolveDpSgd(const BaseSpec& base) {
  if (const auto* b = std::get_if<DpSgdBase>(&base)) return b->config;
  if (const auto* b = std::get_if<CalibratedDpSgdBase>(&base)) {
    absl::StatusOr<double> sigma = CalibrateNoiseMultiplier(
        b->epsilon, b->tau, b->n_iters, b->calib_delta);
    if (!sigma.ok()) return sigma.status();
    return DpSgdConfig::Create(*sigma, b->tau, b->n_iters);
  }
  return absl::InvalidArgumentError("base is not a DP-SGD configuration");
}

absl::StatusOr<TradeoffCurve> BaseCurve(const BaseSpec& base) {
  if (const auto* b = std::get_if<GdpBase>(&base)) {
    return TradeoffCurve::FromGaussian(b->mu);
  }
  if (const auto* b = std::get_if<EpsDeltaBase>(&base)) {
    return TradeoffCurve::FromEpsDelta(b->epsilon, b->delta);
  }
  absl::StatusOr<DpSgdConfig> config = ResolveDpSgd(base);
  if (!config.ok()) return config.status();
  absl::StatusOr<double> mu = DpSgdMu(*config);
  if (!mu.ok()) return mu.status();
  return TradeoffCurve::FromGaussian(*mu);
}

int Execute(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  std::ofstream file;
  std::ostream* sink = &out;
  if (!spec.out.empty()) {
    file.open(spec.out);
    if (!file) {
      err << "error: cannot open " << spec.out << " for writing\n";
      return kExitUsage;
    }
    sink = &file;
  }
  switch (spec.subcommand) {
    case Subcommand::kAccountant:
      return RunAccountant(spec, *sink, err);
    case Subcommand::kCompare:
      return RunCompare(spec, *sink, err);
    case Subcommand::kAudit:
      return RunAuditCommand(spec, *sink, err);
    case Subcommand::kTightness:
      return RunTightness(spec, *sink, err);
    case Subcommand::kTheorem4:
      return RunTheorem4(spec, *sink, err);
  }
  return kExitFailure;
}

int RunMain(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "Privacy accounting for differentially private "
      "hyper-parameter selection"};
  app.require_subcommand(1);
  RunSpec spec;
  std::string format;
  const std::map<std::string, OutputFormat> formats = {
      {"json", OutputFormat::kJson},
      {"csv", OutputFormat::kCsv},
      {"text", OutputFormat::kText}};

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format: json, csv or text")
        ->check(CLI::IsMember({"json", "csv", "text"}));
    sub->add_option("--out", spec.out,
                    "Write the report here instead of "
                    "standard output");
  };

  CLI::App* accountant =
      app.add_subcommand("accountant",
                         "f-DP upper bound for the selection "
                         "protocol");
  accountant
      ->add_option("--base", spec.base,
                   "gdp:mu=<r> | epsdelta:eps=<r>,delta=<r> | "
                   "dpsgd:sigma=<r>,tau=<r>,n=<int> | "
                   "dpsgd:eps=<r>,tau=<r>,n=<int>")
      ->required();
  accountant
      ->add_option("--xi", spec.xi, "pointmass:k=<int> | tnb:eta=<r>,nu=<r>")
      ->required();
  accountant->add_option("--delta-h", spec.delta_h, "Target delta")
      ->capture_default_str();
  add_common(accountant);

  CLI::App* compare = app.add_subcommand(
      "compare", "Table of f-DP and RDP bounds for calibrated DP-SGD");
  compare->add_option("--eps-b", spec.eps_b_list, "Base epsilon (repeatable)");
  compare->add_option("--tau", spec.tau_list, "Sampling ratio (repeatable)");
  compare->add_option("--xi", spec.xi_list, "Run-count spec (repeatable)");
  compare->add_option("--n", spec.n_iters, "DP-SGD iterations")
      ->capture_default_str();
  compare->add_option("--delta", spec.delta_h, "Target delta")
      ->capture_default_str();
  compare->add_flag("--audit", spec.with_audit, "Add an eps_lower column");
  compare->add_option("--trials", spec.trials, "Audit trials")
      ->capture_default_str();
  compare->add_option("--seed", spec.seed, "Audit seed")->capture_default_str();
  compare
      ->add_option("--confidence", spec.confidence,
                   "Clopper-Pearson confidence")
      ->capture_default_str();
  compare->add_option("--threads", spec.threads, "Worker threads");
  add_common(compare);

  CLI::App* audit = app.add_subcommand(
      "audit", "Monte Carlo lower bound from the distinguishing game");
  audit
      ->add_option("--base", spec.base,
                   "dpsgd:sigma=<r>,tau=<r>,n=<int> | "
                   "dpsgd:eps=<r>,tau=<r>,n=<int> | gdp:mu=<r>")
      ->required();
  audit->add_option("--xi", spec.xi, "Run-count spec")->required();
  audit->add_option("--trials", spec.trials, "Number of games")
      ->capture_default_str();
  audit->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
  audit->add_option("--delta", spec.delta_h, "Delta of the bound")
      ->capture_default_str();
  audit
      ->add_option("--confidence", spec.confidence,
                   "Clopper-Pearson confidence")
      ->capture_default_str();
  audit->add_flag("--per-run", spec.per_run,
                  "Simulate every run instead of sampling the maximum");
  audit->add_option("--sweep-csv", spec.sweep_csv,
                    "Also write the per-threshold sweep to this CSV file");
  audit->add_option("--threads", spec.threads, "Worker threads");
  add_common(audit);

  CLI::App* tightness = app.add_subcommand(
      "tightness", "Exact three-symbol example that attains the bound");
  tightness->add_option("--which", spec.which, "pure or approx")
      ->check(CLI::IsMember({"pure", "approx"}))
      ->capture_default_str();
  add_common(tightness);

  CLI::App* theorem4 = app.add_subcommand(
      "theorem4",
      "Randomised check that one-to-one scores are the worst "
      "case");
  theorem4->add_option("--instances", spec.instances, "Number of instances")
      ->capture_default_str();
  theorem4->add_option("--seed", spec.seed, "Random seed");
  theorem4->add_option("--threads", spec.threads, "Worker threads");
  add_common(theorem4);

  // The theorem4 campaign uses its own default seed.
  spec.seed = 1;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  OutputFormat default_format = OutputFormat::kText;
  if (accountant->parsed()) {
    spec.subcommand = Subcommand::kAccountant;
  } else if (compare->parsed()) {
    spec.subcommand = Subcommand::kCompare;
    default_format = OutputFormat::kCsv;
  } else if (audit->parsed()) {
    spec.subcommand = Subcommand::kAudit;
  } else if (tightness->parsed()) {
    spec.subcommand = Subcommand::kTightness;
  } else {
    spec.subcommand = Subcommand::kTheorem4;
    if (theorem4->count("--seed") == 0) spec.seed = 7;
  }
  spec.format = format.empty() ? default_format : formats.at(format);
  return Execute(spec, out, err);
}

}  // namespace privsel::cli
