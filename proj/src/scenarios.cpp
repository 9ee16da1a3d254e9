#include "mrokit/scenarios.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace mrokit {

void SyntheticScenario::validate() const {
  family.validate();
  function_class.validate();
  if (!has_exact_support()) return;
  if (atom_probs.size() != atoms.size())
    throw std::invalid_argument("scenario: atom/probability count mismatch");
  if (atom_weights.rows() != atoms.size() || atom_weights.cols() != family.size())
    throw std::invalid_argument("scenario: atom weight shape mismatch");
  double total = 0.0;
  for (double p : atom_probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("scenario: negative atom probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("scenario: atom probabilities must sum to one");
  for (std::size_t w = 0; w < family.size(); ++w) {
    double mean = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const double v = atom_weights(i, w);
      if (v < 0.0 || v > family.per_weight_bound[w] + 1e-9)
        throw std::invalid_argument("scenario: weight value outside declared bound for " +
                                    family.names[w]);
      mean += atom_probs[i] * v;
    }
    if (std::abs(mean - 1.0) > 1e-9)
      throw std::invalid_argument("scenario: weight column not population-normalized: " +
                                  family.names[w]);
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  // splitmix64 over a simple combination; good enough to decorrelate tasks.
  std::uint64_t x = base + 0x9e3779b97f4a7c15ULL * (a + 1) + 0xbf58476d1ce4e5b9ULL * (b + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

Dataset sample_dataset(const SyntheticScenario& scenario, std::size_t n, std::uint64_t seed) {
  scenario.validate();
  if (!scenario.has_exact_support())
    throw std::invalid_argument("sample_dataset: scenario has no support to sample");
  if (n == 0) throw std::invalid_argument("sample_dataset: n must be >= 1");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(scenario.atom_probs.begin(),
                                               scenario.atom_probs.end());
  std::vector<Sample> samples;
  samples.reserve(n);
  Matrix weights(n, scenario.family.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = pick(rng);
    samples.push_back(scenario.atoms[a]);
    for (std::size_t w = 0; w < scenario.family.size(); ++w)
      weights(i, w) = scenario.atom_weights(a, w);
  }
  return Dataset(std::move(samples), std::move(weights), scenario.family.names,
                 scenario.label_bound);
}

ValidatedData build_sampled(const SyntheticScenario& scenario, std::size_t n,
                            std::uint64_t seed) {
  Dataset raw = sample_dataset(scenario, n, seed);
  return validate_dataset(raw, scenario.family, scenario.renormalize_sampled_weights);
}

std::pair<Dataset, WeightFamily> exact_twin_dataset(const SyntheticScenario& scenario) {
  scenario.validate();
  const std::size_t m = scenario.atoms.size();
  const std::size_t W = scenario.family.size();
  Matrix weights(m, W);
  WeightFamily twin = scenario.family;
  for (std::size_t w = 0; w < W; ++w) {
    double col_max = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      weights(i, w) =
          static_cast<double>(m) * scenario.atom_probs[i] * scenario.atom_weights(i, w);
      col_max = std::max(col_max, weights(i, w));
    }
    twin.per_weight_bound[w] = col_max;
  }
  twin.family_bound = 1.0;
  for (double b : twin.per_weight_bound) twin.family_bound = std::max(twin.family_bound, b);
  Dataset data(scenario.atoms, std::move(weights), scenario.family.names, scenario.label_bound);
  return {std::move(data), std::move(twin)};
}

// ---------------------------------------------------------------------------

SyntheticScenario make_prop1_scenario() {
  SyntheticScenario s;
  s.kind = ScenarioKind::prop1;
  s.name = "prop1";
  s.atoms = {Sample{{}, 0.1, 1}, Sample{{}, 0.0, 2}, Sample{{}, 1.0, 2}};
  s.atom_probs = {0.5, 0.25, 0.25};
  s.atom_weights = Matrix(3, 2);
  s.atom_weights(0, 0) = 2.0;
  s.atom_weights(1, 1) = 2.0;
  s.atom_weights(2, 1) = 2.0;
  s.family = WeightFamily{{"p1", "p2"}, {2.0, 2.0}, 2.0};
  s.function_class = FunctionClass::finite_constants({0.3, 0.6});
  s.loss = LossSpec::squared(1.0);
  s.label_bound = 1.0;
  s.validate();
  return s;
}

Prop1Fixture build_prop1(std::size_t n_per_component, std::uint64_t seed) {
  if (n_per_component == 0) throw std::invalid_argument("build_prop1: need n >= 1");
  Prop1Fixture fixture{make_prop1_scenario(), build_sampled(make_prop1_scenario(),
                                                            2 * n_per_component, seed),
                       Dataset({Sample{{}, 0.0, std::nullopt}}, Matrix(1, 1, 1.0), {"w"}),
                       WeightFamily{}};
  auto [twin, twin_family] = exact_twin_dataset(fixture.scenario);
  fixture.exact_twin = std::move(twin);
  fixture.twin_family = std::move(twin_family);
  return fixture;
}

Example2Matrices build_example2_matrix(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("example2: epsilon must be positive");
  Example2Matrices out;
  out.epsilon = epsilon;
  out.risks = Matrix(3, 2);
  out.risks(0, 0) = 0.0;
  out.risks(1, 0) = 0.5;
  out.risks(2, 0) = 0.5 + epsilon;
  out.risks(0, 1) = 1.0;
  out.risks(1, 1) = 0.9;
  out.risks(2, 1) = 0.4;

  out.regrets = Matrix(3, 2);
  for (std::size_t w = 0; w < 2; ++w) {
    double col_min = out.risks(0, w);
    for (std::size_t k = 1; k < 3; ++k) col_min = std::min(col_min, out.risks(k, w));
    for (std::size_t k = 0; k < 3; ++k) out.regrets(k, w) = out.risks(k, w) - col_min;
  }

  const auto argmin_worst = [](const Matrix& M) {
    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < M.rows(); ++k) {
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t w = 0; w < M.cols(); ++w) worst = std::max(worst, M(k, w));
      if (worst < best_value) {
        best_value = worst;
        best = k;
      }
    }
    return best;
  };
  out.mro_selection = argmin_worst(out.regrets);
  out.dro_selection = argmin_worst(out.risks);
  return out;
}

SyntheticScenario make_dro_slow_scenario(double mu1, double mu2, double C) {
  if (!(C >= mu1 + mu2))
    throw std::invalid_argument("dro_slow: C must be at least mu1 + mu2");
  SyntheticScenario s;
  s.kind = ScenarioKind::dro_slow;
  s.name = "dro-slow";
  s.atoms = {Sample{{}, mu1 + 1.0, 1}, Sample{{}, mu1 - 1.0, 1}, Sample{{}, mu2 + 1.0, 2},
             Sample{{}, mu2 - 1.0, 2}};
  s.atom_probs = {0.25, 0.25, 0.25, 0.25};
  s.atom_weights = Matrix(4, 2);
  s.atom_weights(0, 0) = 2.0;
  s.atom_weights(1, 0) = 2.0;
  s.atom_weights(2, 1) = 2.0;
  s.atom_weights(3, 1) = 2.0;
  s.family = WeightFamily{{"component_1", "component_2"}, {2.0, 2.0}, 2.0};
  s.function_class = FunctionClass::interval(C);
  const double reach = std::max(std::abs(mu1), std::abs(mu2)) + 1.0 + C;
  s.loss = LossSpec::squared(reach * reach);
  s.label_bound = std::max(std::abs(mu1), std::abs(mu2)) + 1.0;
  s.renormalize_sampled_weights = true;
  s.validate();
  return s;
}

ValidatedData build_dro_slow(std::size_t n, double mu1, double mu2, double C,
                             std::uint64_t seed) {
  return build_sampled(make_dro_slow_scenario(mu1, mu2, C), n, seed);
}

LinregCovshiftSpec LinregCovshiftSpec::default_spec(std::size_t d) {
  if (d < 2) throw std::invalid_argument("linreg spec needs d >= 2");
  LinregCovshiftSpec spec;
  spec.dimension = d;
  spec.beta_star.assign(d, 0.3);
  spec.beta_star[0] = 0.7;
  spec.noise = 0.5;
  // One rare direction (+e1) that the shift concentrates on.
  spec.base_atom_probs.assign(2 * d, 0.0);
  spec.base_atom_probs[0] = 0.005;
  spec.base_atom_probs[1] = 0.095;
  const double rest = 0.9 / static_cast<double>(2 * d - 2);
  for (std::size_t a = 2; a < 2 * d; ++a) spec.base_atom_probs[a] = rest;

  CovariateShift spike;
  spike.name = "spike_pos_1";
  spike.target_atom_probs.assign(2 * d, 0.1 / static_cast<double>(2 * d - 1));
  spike.target_atom_probs[0] = 0.9;
  spec.shifts = {std::move(spike)};
  return spec;
}

SyntheticScenario make_linreg_covshift_scenario(const LinregCovshiftSpec& spec) {
  const std::size_t d = spec.dimension;
  if (spec.beta_star.size() != d)
    throw std::invalid_argument("linreg: beta_star dimension mismatch");
  double beta_norm_sq = 0.0;
  for (double b : spec.beta_star) beta_norm_sq += b * b;
  if (beta_norm_sq > 1.0 + 1e-12)
    throw std::invalid_argument("linreg: beta_star must lie in the unit ball");
  if (spec.base_atom_probs.size() != 2 * d)
    throw std::invalid_argument("linreg: base probabilities need 2*d entries");
  if (!(spec.noise >= 0.0)) throw std::invalid_argument("linreg: noise must be nonnegative");

  double base_total = std::accumulate(spec.base_atom_probs.begin(), spec.base_atom_probs.end(), 0.0);
  if (std::abs(base_total - 1.0) > 1e-9)
    throw std::invalid_argument("linreg: base probabilities must sum to one");
  for (double p : spec.base_atom_probs)
    if (!(p > 0.0)) throw std::invalid_argument("linreg: base probabilities must be positive");

  SyntheticScenario s;
  s.kind = ScenarioKind::linreg_covshift;
  s.name = "linreg-covshift";
  const std::size_t W = 1 + spec.shifts.size();
  const std::size_t num_atoms = 4 * d;  // 2d covariate atoms, two noise signs each
  s.atoms.reserve(num_atoms);
  s.atom_probs.reserve(num_atoms);
  s.atom_weights = Matrix(num_atoms, W);

  std::size_t row = 0;
  for (std::size_t a = 0; a < 2 * d; ++a) {
    const std::size_t axis = a / 2;
    const double sign = (a % 2 == 0) ? 1.0 : -1.0;
    std::vector<double> x(d, 0.0);
    x[axis] = sign;
    const double mean = sign * spec.beta_star[axis];
    for (const double noise_sign : {1.0, -1.0}) {
      s.atoms.push_back(Sample{x, mean + noise_sign * spec.noise, static_cast<int>(a)});
      s.atom_probs.push_back(spec.base_atom_probs[a] * 0.5);
      s.atom_weights(row, 0) = 1.0;  // w0 == 1
      for (std::size_t j = 0; j < spec.shifts.size(); ++j) {
        const auto& shift = spec.shifts[j];
        if (shift.target_atom_probs.size() != 2 * d)
          throw std::invalid_argument("linreg: shift probability length mismatch");
        s.atom_weights(row, 1 + j) = shift.target_atom_probs[a] / spec.base_atom_probs[a];
      }
      ++row;
    }
  }

  WeightFamily family;
  family.names = {"w0"};
  family.per_weight_bound = {1.0};
  family.family_bound = 1.0;
  for (std::size_t j = 0; j < spec.shifts.size(); ++j) {
    family.names.push_back(spec.shifts[j].name);
    double b = 0.0;
    for (std::size_t i = 0; i < num_atoms; ++i) b = std::max(b, s.atom_weights(i, 1 + j));
    family.per_weight_bound.push_back(b);
    family.family_bound = std::max(family.family_bound, b);
  }
  s.family = std::move(family);
  s.function_class = FunctionClass::linear_ball(d, 1.0);
  const double reach = 1.0 + (1.0 + spec.noise);
  s.loss = LossSpec::squared(reach * reach);
  s.label_bound = 1.0 + spec.noise;
  s.validate();
  return s;
}

ValidatedData build_linreg_covshift(const LinregCovshiftSpec& spec, std::size_t n,
                                    std::uint64_t seed) {
  return build_sampled(make_linreg_covshift_scenario(spec), n, seed);
}

std::vector<double> covariate_second_moment_diag(const LinregCovshiftSpec& spec) {
  std::vector<double> diag(spec.dimension, 0.0);
  for (std::size_t a = 0; a < 2 * spec.dimension; ++a) diag[a / 2] += spec.base_atom_probs[a];
  return diag;
}

double sigma_weighted_sq_error(const std::vector<double>& beta,
                               const std::vector<double>& beta_star,
                               const std::vector<double>& sigma_diag) {
  if (beta.size() != beta_star.size() || beta.size() != sigma_diag.size())
    throw std::invalid_argument("sigma_weighted_sq_error: dimension mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    const double diff = beta[j] - beta_star[j];
    acc += sigma_diag[j] * diff * diff;
  }
  return acc;
}

std::vector<double> ordinary_least_squares(const Dataset& dataset) {
  const std::size_t d = dataset.feature_dim();
  Eigen::MatrixXd X(dataset.size(), d);
  Eigen::VectorXd y(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) X(i, j) = dataset.sample(i).features[j];
    y(i) = dataset.sample(i).label;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
  const Eigen::VectorXd beta = cod.solve(y);
  return std::vector<double>(beta.data(), beta.data() + beta.size());
}

ContextualBanditSpec ContextualBanditSpec::default_spec() {
  ContextualBanditSpec spec;
  spec.num_actions = 3;
  spec.context_dim = 2;
  spec.contexts = {{1.0, 0.0}, {0.0, 1.0}};
  spec.context_probs = {0.5, 0.5};
  spec.reward_means = Matrix(2, 3);
  spec.reward_means(0, 0) = 0.9;
  spec.reward_means(0, 1) = 0.5;
  spec.reward_means(0, 2) = 0.1;
  spec.reward_means(1, 0) = 0.2;
  spec.reward_means(1, 1) = 0.6;
  spec.reward_means(1, 2) = 0.8;

  Matrix uniform(2, 3, 1.0 / 3.0);
  spec.logging_policy = uniform;
  spec.floor = 0.2;

  Matrix greedy(2, 3, 0.0);
  greedy(0, 0) = 1.0;
  greedy(1, 2) = 1.0;
  Matrix anti(2, 3, 0.0);
  anti(0, 2) = 1.0;
  anti(1, 0) = 1.0;
  spec.policies = {BanditPolicy{"greedy", greedy}, BanditPolicy{"uniform", uniform},
                   BanditPolicy{"anti_greedy", anti}};
  return spec;
}

SyntheticScenario make_contextual_bandit_scenario(const ContextualBanditSpec& spec) {
  const std::size_t K = spec.num_actions;
  const std::size_t d = spec.context_dim;
  const std::size_t m = spec.contexts.size();
  if (m == 0 || spec.context_probs.size() != m)
    throw std::invalid_argument("bandit: context table mismatch");
  if (spec.reward_means.rows() != m || spec.reward_means.cols() != K)
    throw std::invalid_argument("bandit: reward mean shape mismatch");
  if (spec.logging_policy.rows() != m || spec.logging_policy.cols() != K)
    throw std::invalid_argument("bandit: logging policy shape mismatch");
  if (!(spec.floor > 0.0)) throw std::invalid_argument("bandit: floor must be positive");
  if (spec.policies.empty()) throw std::invalid_argument("bandit: need at least one policy");

  const auto check_rows = [&](const Matrix& policy, const std::string& who, double min_prob) {
    for (std::size_t c = 0; c < m; ++c) {
      double total = 0.0;
      for (std::size_t a = 0; a < K; ++a) {
        const double p = policy(c, a);
        if (p < 0.0 || p > 1.0)
          throw std::invalid_argument("bandit: invalid probability in " + who);
        if (p < min_prob)
          throw std::invalid_argument("bandit: logging policy violates the floor");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("bandit: policy rows must sum to one in " + who);
    }
  };
  check_rows(spec.logging_policy, "logging", spec.floor);
  for (const auto& policy : spec.policies) check_rows(policy.action_probs, policy.name, 0.0);

  SyntheticScenario s;
  s.kind = ScenarioKind::contextual_bandit;
  s.name = "contextual-bandit";
  const std::size_t W = spec.policies.size();
  const std::size_t num_atoms = m * K * 2;  // reward in {1, 0}
  s.atom_weights = Matrix(num_atoms, W);
  s.atoms.reserve(num_atoms);
  s.atom_probs.reserve(num_atoms);

  std::size_t row = 0;
  for (std::size_t c = 0; c < m; ++c) {
    if (spec.contexts[c].size() != d)
      throw std::invalid_argument("bandit: context dimension mismatch");
    for (std::size_t a = 0; a < K; ++a) {
      std::vector<double> phi(K * d, 0.0);
      for (std::size_t j = 0; j < d; ++j) phi[a * d + j] = spec.contexts[c][j];
      const double theta = spec.reward_means(c, a);
      const double base = spec.context_probs[c] * spec.logging_policy(c, a);
      for (const double reward : {1.0, 0.0}) {
        s.atoms.push_back(Sample{phi, reward, static_cast<int>(a)});
        s.atom_probs.push_back(base * (reward > 0.5 ? theta : 1.0 - theta));
        for (std::size_t j = 0; j < W; ++j)
          s.atom_weights(row, j) =
              spec.policies[j].action_probs(c, a) / spec.logging_policy(c, a);
        ++row;
      }
    }
  }

  WeightFamily family;
  family.family_bound = 1.0;
  for (std::size_t j = 0; j < W; ++j) {
    family.names.push_back(spec.policies[j].name);
    double b = 0.0;
    for (std::size_t i = 0; i < num_atoms; ++i) b = std::max(b, s.atom_weights(i, j));
    family.per_weight_bound.push_back(b);
    family.family_bound = std::max(family.family_bound, b);
  }
  s.family = std::move(family);
  s.function_class = FunctionClass::linear_ball(K * d, 1.0);
  s.loss = LossSpec::squared(4.0);
  s.label_bound = 1.0;
  s.validate();
  return s;
}

ValidatedData build_contextual_bandit(const ContextualBanditSpec& spec, std::size_t n,
                                      std::uint64_t seed) {
  return build_sampled(make_contextual_bandit_scenario(spec), n, seed);
}

// ---------------------------------------------------------------------------

std::vector<Hypothesis> population_minimizers(const SyntheticScenario& scenario) {
  scenario.validate();
  if (!scenario.has_exact_support())
    throw std::invalid_argument("population minimizers need an exact support");
  Dataset atom_data(scenario.atoms, scenario.atom_weights, scenario.family.names,
                    scenario.label_bound);
  std::vector<Hypothesis> out;
  out.reserve(scenario.family.size());
  std::vector<double> omega(scenario.atoms.size());
  for (std::size_t w = 0; w < scenario.family.size(); ++w) {
    for (std::size_t i = 0; i < omega.size(); ++i)
      omega[i] = scenario.atom_probs[i] * scenario.atom_weights(i, w);
    ErmRequest request{&omega, &atom_data, scenario.loss, scenario.function_class, 1e-10};
    out.push_back(solve_erm(request));
  }
  return out;
}

double population_worst_case_risk(const Hypothesis& hypothesis,
                                  const SyntheticScenario& scenario) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < scenario.family.size(); ++w)
    worst = std::max(worst,
                     population_risk(hypothesis, scenario, w, PopulationMode::exact()));
  return worst;
}

namespace {

// Minimizes a convex function on [lo, hi] by ternary search.
double ternary_min(const std::function<double(double)>& f, double lo, double hi) {
  for (int iter = 0; iter < 300; ++iter) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2))
      hi = m2;
    else
      lo = m1;
  }
  return f(0.5 * (lo + hi));
}

double minimax_over_class(const SyntheticScenario& scenario,
                          const std::function<double(const Hypothesis&)>& objective) {
  const FunctionClass& cls = scenario.function_class;
  if (cls.kind == FunctionClassKind::finite) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cls.finite_size(); ++k)
      best = std::min(best, objective(Hypothesis::finite(cls, k)));
    return best;
  }
  if (cls.kind == FunctionClassKind::interval_constant) {
    const auto eval = [&](double c) { return objective(Hypothesis::constant(cls, c)); };
    return ternary_min(eval, -cls.radius, cls.radius);
  }
  throw std::invalid_argument("population minimax supports finite and interval classes");
}

}  // namespace

double population_minimax_risk(const SyntheticScenario& scenario) {
  return minimax_over_class(
      scenario, [&](const Hypothesis& h) { return population_worst_case_risk(h, scenario); });
}

double population_minimax_regret(const SyntheticScenario& scenario) {
  const std::vector<Hypothesis> minimizers = population_minimizers(scenario);
  std::vector<double> baselines(scenario.family.size());
  for (std::size_t w = 0; w < baselines.size(); ++w)
    baselines[w] = population_risk(minimizers[w], scenario, w, PopulationMode::exact());
  return minimax_over_class(scenario, [&](const Hypothesis& h) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < baselines.size(); ++w)
      worst = std::max(worst, population_risk(h, scenario, w, PopulationMode::exact()) -
                                  baselines[w]);
    return worst;
  });
}

std::size_t population_selection_mro(const SyntheticScenario& scenario) {
  if (scenario.function_class.kind != FunctionClassKind::finite)
    throw std::invalid_argument("population selection needs a finite class");
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < scenario.function_class.finite_size(); ++k) {
    const RegretReport report =
        population_regret_report(Hypothesis::finite(scenario.function_class, k), scenario);
    if (report.worst_case_regret < best_value) {
      best_value = report.worst_case_regret;
      best = k;
    }
  }
  return best;
}

std::size_t population_selection_dro(const SyntheticScenario& scenario) {
  if (scenario.function_class.kind != FunctionClassKind::finite)
    throw std::invalid_argument("population selection needs a finite class");
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < scenario.function_class.finite_size(); ++k) {
    const double worst = population_worst_case_risk(
        Hypothesis::finite(scenario.function_class, k), scenario);
    if (worst < best_value) {
      best_value = worst;
      best = k;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

double fit_log_log_slope(const std::vector<std::size_t>& n_values,
                         const std::vector<double>& values) {
  if (n_values.size() != values.size() || n_values.size() < 2)
    throw std::invalid_argument("slope fit needs at least two points");
  std::vector<double> xs(values.size()), ys(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0))
      throw std::invalid_argument("slope fit needs strictly positive values");
    xs[i] = std::log(static_cast<double>(n_values[i]));
    ys[i] = std::log(values[i]);
  }
  const double n = static_cast<double>(xs.size());
  const double mean_x = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double mean_y = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
  }
  return sxy / sxx;
}

namespace {

double median_of(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  std::nth_element(values.begin(), values.begin() + mid - 1, values.begin() + mid);
  return 0.5 * (values[mid - 1] + upper);
}

}  // namespace

RateSweepResult rate_sweep(const SyntheticScenario& scenario, SweepMethod method,
                           SweepMetric metric, const RateSweepConfig& config) {
  scenario.validate();
  if (config.n_grid.size() < 4)
    throw std::invalid_argument("rate sweep needs at least four grid points");
  for (std::size_t i = 1; i < config.n_grid.size(); ++i)
    if (config.n_grid[i] <= config.n_grid[i - 1])
      throw std::invalid_argument("rate sweep grid must be strictly increasing");
  if (config.replicates == 0) throw std::invalid_argument("rate sweep needs replicates >= 1");

  // Population targets are shared across all tasks.
  const std::vector<Hypothesis> pop_minimizers = population_minimizers(scenario);
  std::vector<double> pop_baselines(scenario.family.size());
  for (std::size_t w = 0; w < pop_baselines.size(); ++w)
    pop_baselines[w] =
        population_risk(pop_minimizers[w], scenario, w, PopulationMode::exact());
  const double target = metric == SweepMetric::worst_case_risk_excess
                            ? population_minimax_risk(scenario)
                            : population_minimax_regret(scenario);

  const auto evaluate = [&](const Hypothesis& h) {
    if (metric == SweepMetric::worst_case_risk_excess)
      return population_worst_case_risk(h, scenario) - target;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < pop_baselines.size(); ++w)
      worst = std::max(worst, population_risk(h, scenario, w, PopulationMode::exact()) -
                                  pop_baselines[w]);
    return worst - target;
  };

  const auto solve_one = [&](std::size_t n, std::uint64_t seed) {
    ValidatedData data = build_sampled(scenario, n, seed);
    if (method == SweepMethod::erm_p0) {
      std::vector<double> omega(data.dataset.size(), 1.0);
      ErmRequest request{&omega, &data.dataset, scenario.loss, scenario.function_class, 1e-8};
      return evaluate(solve_erm(request));
    }
    Objective objective = Objective::mro();
    if (method == SweepMethod::smro) objective = Objective::smro(config.smro_scaling);
    if (method == SweepMethod::dro) objective = Objective::dro();
    const GameSolution solution =
        solve_game(data.dataset, data.family, ErmOracle{}, scenario.loss,
                   scenario.function_class, objective, config.rounds, config.eta);
    return evaluate(solution.iterate_hypotheses[solution.best_iterate]);
  };

  RateSweepResult result;
  result.n_grid = config.n_grid;
  result.replicates = config.replicates;
  result.seed = config.seed;
  result.metrics.assign(config.n_grid.size(),
                        std::vector<double>(config.replicates, 0.0));

  struct Task {
    std::size_t n_index;
    std::size_t replicate;
  };
  std::vector<Task> tasks;
  tasks.reserve(config.n_grid.size() * config.replicates);
  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni)
    for (std::size_t r = 0; r < config.replicates; ++r) tasks.push_back({ni, r});

  unsigned jobs = config.jobs != 0 ? config.jobs : std::thread::hardware_concurrency();
  jobs = std::max(1u, std::min<unsigned>(jobs, tasks.size()));

  std::atomic<std::size_t> next{0};
  std::vector<std::string> errors(tasks.size());
  std::vector<char> failed(tasks.size(), 0);
  const auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) return;
      const Task task = tasks[idx];
      try {
        result.metrics[task.n_index][task.replicate] =
            solve_one(config.n_grid[task.n_index],
                      derive_seed(config.seed, task.n_index, task.replicate));
      } catch (const std::exception& e) {
        failed[idx] = 1;
        errors[idx] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (std::size_t idx = 0; idx < tasks.size(); ++idx)
    if (failed[idx])
      throw RateSweepFailure("rate sweep replicate failed (n=" +
                                 std::to_string(config.n_grid[tasks[idx].n_index]) +
                                 ", replicate=" + std::to_string(tasks[idx].replicate) +
                                 "): " + errors[idx],
                             result);

  result.per_n_median_metric.reserve(config.n_grid.size());
  for (const auto& row : result.metrics)
    result.per_n_median_metric.push_back(median_of(row));
  result.fitted_slope = fit_log_log_slope(result.n_grid, result.per_n_median_metric);
  return result;
}

}  // namespace mrokit
