#ifndef MROKIT_IO_HPP
#define MROKIT_IO_HPP

#include <iosfwd>
#include <string>

#include "mrokit/scenarios.hpp"
#include "mrokit/solver.hpp"

namespace mrokit {

/// Decimal text with 17 significant digits: round-trips IEEE doubles and
/// keeps output byte-stable across runs.
std::string format_real(double value);

/// One JSON object per line:
/// {"features":[...],"label":y,"tag":t?,"weights":{"name":value,...}}
void write_dataset_jsonl(std::ostream& out, const Dataset& dataset);

/// Reads JSON Lines; every line must carry exactly the weight names of
/// `expected_names`, which fixes the column order.
Dataset read_dataset_jsonl(std::istream& in, const std::vector<std::string>& expected_names);

std::string weight_family_to_json(const WeightFamily& family);
std::string function_class_to_json(const FunctionClass& cls);
std::string loss_to_json(const LossSpec& loss);

/// Strict parsers: unknown keys are rejected.
WeightFamily parse_weight_family(const std::string& json_text);
FunctionClass parse_function_class(const std::string& json_text);
LossSpec parse_loss(const std::string& json_text);

const char* objective_mode_name(ObjectiveMode mode);
const char* scaling_kind_name(ScalingKind kind);

/// Full result document with fixed field order.
std::string solution_to_json(const GameSolution& solution,
                             const std::vector<std::string>& weight_names);

/// Flat object with per-weight arrays plus the worst case.
std::string regret_report_to_json(const RegretReport& report,
                                  const std::vector<std::string>& weight_names);

void write_sweep_csv(std::ostream& out, const RateSweepResult& result);
std::string sweep_summary_json(const RateSweepResult& result, const std::string& scenario,
                               const std::string& method, const std::string& metric);

/// Everything cmd_solve needs, parsed from one strict JSON document.
struct SolveConfig {
  Objective objective;
  std::size_t rounds = 2000;
  std::optional<double> eta;
  std::uint64_t seed = 0;
  bool renormalize = false;
  LossSpec loss;
  FunctionClass function_class;
  WeightFamily family;
};

SolveConfig parse_solve_config(const std::string& json_text);

struct RatesConfig {
  SyntheticScenario scenario;
  SweepMethod method = SweepMethod::dro;
  SweepMetric metric = SweepMetric::worst_case_risk_excess;
  RateSweepConfig sweep;
  std::optional<std::pair<double, double>> target_interval;  // echoed, not enforced
};

RatesConfig parse_rates_config(const std::string& json_text);

struct BanditConfig {
  ContextualBanditSpec spec;
  std::size_t n = 4000;
  std::size_t rounds = 400;
  std::optional<double> eta;
  std::uint64_t seed = 0;
};

BanditConfig parse_bandit_config(const std::string& json_text);

}  // namespace mrokit

#endif  // MROKIT_IO_HPP
