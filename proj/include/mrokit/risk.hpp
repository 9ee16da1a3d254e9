#ifndef MROKIT_RISK_HPP
#define MROKIT_RISK_HPP

#include <cstdint>
#include <iosfwd>

#include "mrokit/core.hpp"

namespace mrokit {

struct SyntheticScenario;

/// Tolerance of the shipped ERM oracles. Empirical regrets more negative
/// than this indicate a bug rather than roundoff.
inline constexpr double kOracleTolerance = 1e-8;

/// Per-weight risks, baselines and regrets plus the worst case.
/// `per_weight_regret` holds the raw differences risk - baseline;
/// `per_weight_regret_clamped` zeroes tiny negatives (within the oracle
/// tolerance) for reporting. Argmax and worst case use the raw values.
struct RegretReport {
  std::vector<double> per_weight_risk;
  std::vector<double> per_weight_baseline;
  std::vector<double> per_weight_regret;
  std::vector<double> per_weight_regret_clamped;
  double worst_case_regret = 0.0;
  std::size_t argmax_weight = 0;
};

enum class ScalingKind { none, slow, fast, explicit_values };

/// How the per-distribution scaling coefficients c_w are produced:
///  - slow: c_w = sigma_hat_w + B_w / sqrt(n)
///  - fast: c_w = B_w
///  - explicit_values: user supplied
struct ScalingRule {
  ScalingKind kind = ScalingKind::none;
  std::vector<double> explicit_coefficients;

  static ScalingRule none() { return {ScalingKind::none, {}}; }
  static ScalingRule slow() { return {ScalingKind::slow, {}}; }
  static ScalingRule fast() { return {ScalingKind::fast, {}}; }
  static ScalingRule explicit_values(std::vector<double> c) {
    return {ScalingKind::explicit_values, std::move(c)};
  }
};

/// Weighted empirical risk (1/n) sum_i w(z_i) loss(z_i, f(z_i)).
double empirical_risk(const Hypothesis& hypothesis, std::size_t weight_index,
                      const Dataset& dataset, const LossSpec& loss);

/// All weight columns in one pass over the data.
std::vector<double> per_weight_empirical_risks(const Hypothesis& hypothesis,
                                               const Dataset& dataset, const LossSpec& loss);

/// Regret report against precomputed per-weight ERM baselines. Baselines
/// are passed in, not recomputed, so this stays a cheap pure functional of
/// already-known quantities.
RegretReport empirical_regret_report(const Hypothesis& hypothesis, const Dataset& dataset,
                                     const LossSpec& loss,
                                     const std::vector<double>& baselines);

/// Assembles a report from already-computed risks (no data pass).
RegretReport regret_report_from_risks(std::vector<double> risks,
                                      std::vector<double> baselines);

/// Coefficients c_w for the given rule. Every output is strictly positive;
/// degenerate inputs (zero slow-rule column with zero bound, nonpositive
/// explicit entry) throw.
std::vector<double> scaling_coefficients(const ScalingRule& rule, const Dataset& dataset,
                                         const WeightFamily& family);

struct PopulationMode {
  enum class Kind { exact, monte_carlo } kind = Kind::exact;
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;

  static PopulationMode exact() { return {}; }
  static PopulationMode monte_carlo(std::size_t n, std::uint64_t seed) {
    return {Kind::monte_carlo, n, seed};
  }
};

/// Population risk R_w(f) under the scenario's weight `weight_index`.
/// Exact mode evaluates the closed-form finite-support expectation and
/// throws if the scenario has none; monte_carlo averages over `n` draws
/// with the stated seed.
double population_risk(const Hypothesis& hypothesis, const SyntheticScenario& scenario,
                       std::size_t weight_index, const PopulationMode& mode);

/// Per-weight population regrets against the scenario's closed-form
/// per-weight minimizers.
RegretReport population_regret_report(const Hypothesis& hypothesis,
                                      const SyntheticScenario& scenario);

/// CSV with columns (weight_name, risk, baseline, regret); regrets are the
/// clamped values.
void write_regret_report_csv(std::ostream& out, const RegretReport& report,
                             const std::vector<std::string>& weight_names);

}  // namespace mrokit

#endif  // MROKIT_RISK_HPP
