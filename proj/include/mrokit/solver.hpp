#ifndef MROKIT_SOLVER_HPP
#define MROKIT_SOLVER_HPP

#include <optional>

#include "mrokit/oracles.hpp"
#include "mrokit/risk.hpp"

namespace mrokit {

enum class ObjectiveMode { mro, smro, dro };

/// Which game is being solved: minimax regret (mro), minimax regret with
/// per-distribution scaling (smro), or minimax raw risk (dro). The scaling
/// rule is consulted only in smro mode.
struct Objective {
  ObjectiveMode mode = ObjectiveMode::mro;
  ScalingRule scaling = ScalingRule::none();

  static Objective mro() { return {ObjectiveMode::mro, ScalingRule::none()}; }
  static Objective smro(ScalingRule rule) { return {ObjectiveMode::smro, std::move(rule)}; }
  static Objective dro() { return {ObjectiveMode::dro, ScalingRule::none()}; }
};

struct BaselineSet {
  std::vector<double> values;      // R_hat_w(f_hat_w) per weight
  std::vector<Hypothesis> minimizers;
};

/// One oracle call per weight with omega_i = weight_matrix[i, w].
/// Throws on a degenerate all-zero column.
BaselineSet precompute_baselines(const Dataset& dataset, const WeightFamily& family,
                                 const ErmOracle& oracle, const LossSpec& loss,
                                 const FunctionClass& function_class);

/// mro: risk - baseline; smro: (risk - baseline) / c_w; dro: risk.
double payoff_from_risk(double risk, std::size_t weight_index, ObjectiveMode mode,
                        const std::vector<double>& baselines,
                        const std::vector<double>& scaling);

/// sqrt(ln|W| / (range^2 T)); zero for a singleton family, where the weight
/// player is constant.
double default_eta(double payoff_range, std::size_t rounds, std::size_t family_size);

/// Output of the exponentiated-gradient / best-response dynamics.
///
/// `mixture_value` is the worst-case payoff of the uniform mixture over the
/// iterates, sup_w (1/T) sum_t payoff(f_t, w); it is the quantity the
/// no-regret analysis certifies to lie within 2*range*sqrt(ln|W|/T) of the
/// exact mixed game value. `iterate_sup_avg` is the average over rounds of
/// sup_w payoff(f_t, w); it upper-bounds both mixture_value and the best
/// iterate's worst-case payoff.
struct GameSolution {
  std::vector<Hypothesis> iterate_hypotheses;
  std::vector<double> rho_final;
  std::vector<double> per_weight_baselines;
  std::vector<double> scaling;  // c_w actually used (ones outside smro)
  double mixture_value = 0.0;
  double iterate_sup_avg = 0.0;
  double best_dual_value = 0.0;  // max_t E_{w~rho_t} payoff(f_t, w)
  std::size_t best_iterate = 0;
  double best_iterate_payoff = 0.0;
  double gap_certificate = 0.0;
  double eta = 0.0;
  std::size_t rounds = 0;
  double payoff_range = 0.0;
  ObjectiveMode mode = ObjectiveMode::mro;
};

/// Runs T rounds of best response against an exponentiated-gradient weight
/// player, starting from the uniform distribution. The best response at
/// round t is the weighted ERM under omega_i = sum_w rho_t(w) W[i,w] / c_w.
///
/// Pass an empty oracle to use the built-in exact oracles; finite and
/// interval classes then run on precomputed sufficient statistics, which is
/// exactly equivalent and much faster than per-round data passes.
GameSolution solve_game(const Dataset& dataset, const WeightFamily& family,
                        const ErmOracle& oracle, const LossSpec& loss,
                        const FunctionClass& function_class, const Objective& objective,
                        std::size_t rounds, std::optional<double> eta_override = std::nullopt);

/// Distance from `mixture_value` to the best available lower bound on the
/// game value: the exact mixed value (small finite classes) or the best
/// dual value max_t E_{rho_t} payoff (always valid by weak duality).
double gap_certificate(const GameSolution& solution, const Dataset& dataset,
                       const WeightFamily& family, const LossSpec& loss,
                       const FunctionClass& function_class, const Objective& objective);

struct MatrixGameSolution {
  double value = 0.0;
  std::vector<double> row_strategy;  // minimizing player
  std::vector<double> col_strategy;  // maximizing player
};

/// Exact minimax value of a small matrix game (rows minimize, columns
/// maximize) by enumeration of square support kernels. Intended for
/// dimensions up to 8 per side; used as the brute-force oracle in gap tests.
MatrixGameSolution mixed_game_value(const Matrix& payoff);

/// Worst-case regret of `hypothesis` over the continuous family of all
/// weights with 0 <= w <= B and sample mean one:
///   max_{f' in class} inf_eta { eta + (B/n) sum_i (l_i(f) - l_i(f') - eta)_+ }
/// The inner infimum is attained at the ceil(n(1-1/B))-th order statistic
/// of the loss differences (smallest minimizer on ties). Candidate classes:
/// finite (enumerated) or interval (grid plus golden-section refinement).
double worst_case_regret_bounded_family(const Hypothesis& hypothesis, const Dataset& dataset,
                                        const LossSpec& loss,
                                        const FunctionClass& candidate_class, double B);

}  // namespace mrokit

#endif  // MROKIT_SOLVER_HPP
