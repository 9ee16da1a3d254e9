#ifndef MROKIT_SCENARIOS_HPP
#define MROKIT_SCENARIOS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include "mrokit/risk.hpp"
#include "mrokit/solver.hpp"

namespace mrokit {

enum class ScenarioKind { prop1, example2_matrix, dro_slow, linreg_covshift, contextual_bandit, custom };

/// A generative description with a finite exact support: atoms with
/// probabilities and the importance-weight value of every family member at
/// every atom. All shipped scenarios are discrete, so population risks are
/// finite sums; Monte Carlo evaluation samples the same support.
struct SyntheticScenario {
  ScenarioKind kind = ScenarioKind::custom;
  std::string name;

  std::vector<Sample> atoms;
  std::vector<double> atom_probs;
  Matrix atom_weights;  // atoms x |W|, population mean one per column

  WeightFamily family;
  FunctionClass function_class;
  LossSpec loss;
  std::optional<double> label_bound;

  /// dro_slow renormalizes sampled weight columns to empirical mean one;
  /// the other scenarios trust the declared family.
  bool renormalize_sampled_weights = false;

  bool has_exact_support() const { return !atoms.empty(); }
  void validate() const;
};

/// Deterministic per-task seed stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

/// Draws n i.i.d. samples from the exact support; weight entries are the
/// atom's weight values (not probability scaled).
Dataset sample_dataset(const SyntheticScenario& scenario, std::size_t n, std::uint64_t seed);

/// sample_dataset followed by validation under the scenario's
/// renormalization policy.
ValidatedData build_sampled(const SyntheticScenario& scenario, std::size_t n,
                            std::uint64_t seed);

/// A finite dataset whose empirical risks equal the scenario's population
/// risks exactly: one row per atom, weight entries m * prob_i * w(atom_i),
/// with bounds re-declared to the resulting column maxima.
std::pair<Dataset, WeightFamily> exact_twin_dataset(const SyntheticScenario& scenario);

// ---------------------------------------------------------------------------
// Shipped scenarios

/// Two target distributions with heterogeneous noise: a point mass at 0.1
/// and a fair Bernoulli, mean estimation with squared loss over the
/// constants {0.3, 0.6}.
SyntheticScenario make_prop1_scenario();

struct Prop1Fixture {
  SyntheticScenario scenario;
  ValidatedData sampled;
  Dataset exact_twin;
  WeightFamily twin_family;
};

/// Sampled mixture (2 * n_per_component expected draws) plus the exact twin.
Prop1Fixture build_prop1(std::size_t n_per_component, std::uint64_t seed);

struct Example2Matrices {
  Matrix risks;    // |F| x |W|
  Matrix regrets;  // risks minus column minima
  std::size_t mro_selection = 0;
  std::size_t dro_selection = 0;
  double epsilon = 0.01;
};

/// Fixed 3x2 risk table where the minimax-regret and minimax-risk
/// selections disagree.
Example2Matrices build_example2_matrix(double epsilon = 0.01);

/// Two-component location family: x = mu_i + eps with eps = +-1
/// equiprobable, tag-indicator weights, constants in [-C, C].
/// Requires C >= mu1 + mu2.
SyntheticScenario make_dro_slow_scenario(double mu1 = 1.5, double mu2 = 0.5, double C = 2.0);

ValidatedData build_dro_slow(std::size_t n, double mu1, double mu2, double C,
                             std::uint64_t seed);

struct CovariateShift {
  std::string name;
  std::vector<double> target_atom_probs;
};

/// Discrete covariate-shift regression: covariates live on {+-e_j}, labels
/// are beta_star . x plus symmetric +-noise, and each shift reweights the
/// covariate atoms with bounded density ratios.
struct LinregCovshiftSpec {
  std::size_t dimension = 5;
  std::vector<double> beta_star;
  double noise = 0.5;
  std::vector<double> base_atom_probs;  // 2*dimension entries: +e1, -e1, +e2, ...
  std::vector<CovariateShift> shifts;

  /// The shipped instance: one rare covariate direction that a single
  /// high-ratio shift concentrates on.
  static LinregCovshiftSpec default_spec(std::size_t d = 5);
};

SyntheticScenario make_linreg_covshift_scenario(const LinregCovshiftSpec& spec);

ValidatedData build_linreg_covshift(const LinregCovshiftSpec& spec, std::size_t n,
                                    std::uint64_t seed);

/// Diagonal of E[x x^T] under the base covariate distribution.
std::vector<double> covariate_second_moment_diag(const LinregCovshiftSpec& spec);

/// (beta - beta_star)^T Sigma (beta - beta_star) for diagonal Sigma.
double sigma_weighted_sq_error(const std::vector<double>& beta,
                               const std::vector<double>& beta_star,
                               const std::vector<double>& sigma_diag);

/// Unconstrained least squares on the raw samples (no weighting, no ball).
std::vector<double> ordinary_least_squares(const Dataset& dataset);

struct BanditPolicy {
  std::string name;
  Matrix action_probs;  // contexts x K, rows sum to one
};

/// Offline contextual bandit reward regression: discrete contexts, logged
/// actions from a floored logging policy, one weight column per candidate
/// policy with w = pi(a|x) / mu(a|x).
struct ContextualBanditSpec {
  std::size_t num_actions = 3;
  std::size_t context_dim = 2;
  std::vector<std::vector<double>> contexts;
  std::vector<double> context_probs;
  Matrix reward_means;  // contexts x K, values in [0, 1]; rewards are Bernoulli
  std::vector<BanditPolicy> policies;
  Matrix logging_policy;
  double floor = 0.1;

  static ContextualBanditSpec default_spec();
};

SyntheticScenario make_contextual_bandit_scenario(const ContextualBanditSpec& spec);

ValidatedData build_contextual_bandit(const ContextualBanditSpec& spec, std::size_t n,
                                      std::uint64_t seed);

// ---------------------------------------------------------------------------
// Population analysis

/// Per-weight population ERM hypotheses (exact, via the oracle on the
/// probability-weighted atoms).
std::vector<Hypothesis> population_minimizers(const SyntheticScenario& scenario);

double population_worst_case_risk(const Hypothesis& hypothesis,
                                  const SyntheticScenario& scenario);

/// inf over the class of the worst-case population risk (enumeration for
/// finite classes, ternary search for interval classes).
double population_minimax_risk(const SyntheticScenario& scenario);

/// inf over the class of the worst-case population regret.
double population_minimax_regret(const SyntheticScenario& scenario);

/// Enumerated population selections for finite classes.
std::size_t population_selection_mro(const SyntheticScenario& scenario);
std::size_t population_selection_dro(const SyntheticScenario& scenario);

// ---------------------------------------------------------------------------
// Rate sweeps

enum class SweepMethod { mro, smro, dro, erm_p0 };

/// Both metrics are excesses over the population optimum of the matching
/// criterion, so they decay toward zero and a log-log slope is meaningful.
enum class SweepMetric { worst_case_regret_excess, worst_case_risk_excess };

struct RateSweepConfig {
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 100;
  std::uint64_t seed = 0;
  std::size_t rounds = 300;
  std::optional<double> eta;
  ScalingRule smro_scaling = ScalingRule::fast();
  unsigned jobs = 0;  // 0: hardware concurrency
};

struct RateSweepResult {
  std::vector<std::size_t> n_grid;
  std::vector<double> per_n_median_metric;
  std::vector<std::vector<double>> metrics;  // [n_index][replicate]
  double fitted_slope = 0.0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
};

/// Thrown when a replicate fails; carries whatever completed.
struct RateSweepFailure : std::runtime_error {
  RateSweepFailure(const std::string& message, RateSweepResult partial_result)
      : std::runtime_error(message), partial(std::move(partial_result)) {}
  RateSweepResult partial;
};

/// For each n and replicate: build data, solve with the method, evaluate
/// the population metric exactly, then fit an OLS slope on
/// (log n, log median metric). Replicates run in parallel with derived
/// seeds, so results do not depend on scheduling.
RateSweepResult rate_sweep(const SyntheticScenario& scenario, SweepMethod method,
                           SweepMetric metric, const RateSweepConfig& config);

/// OLS slope of log(values) against log(n). Requires positive values.
double fit_log_log_slope(const std::vector<std::size_t>& n_values,
                         const std::vector<double>& values);

}  // namespace mrokit

#endif  // MROKIT_SCENARIOS_HPP
