#ifndef MROKIT_ORACLES_HPP
#define MROKIT_ORACLES_HPP

#include <functional>

#include "mrokit/core.hpp"

namespace mrokit {

/// A weighted ERM problem: minimize sum_i omega_i * loss(z_i, f(z_i)) over
/// the function class. The composite per-sample weights omega typically mix
/// several family columns.
struct ErmRequest {
  const std::vector<double>* per_sample_weights = nullptr;
  const Dataset* dataset = nullptr;
  LossSpec loss;
  FunctionClass function_class;
  double tolerance = 1e-8;

  void validate() const;
};

/// Exhaustive minimum over the finite candidate list; ties break to the
/// lowest index so runs are reproducible.
Hypothesis erm_finite(const ErmRequest& request);

/// Squared loss over constants in [-C, C]: the weighted label mean, clipped.
Hypothesis erm_interval_mean(const ErmRequest& request);

/// Weighted least squares constrained to ||beta|| <= r. Interior solutions
/// come from a rank-revealing solve (minimal-norm on rank-deficient
/// designs); boundary solutions from root-finding on the multiplier of the
/// ball constraint.
Hypothesis erm_linear_l2(const ErmRequest& request);

/// Dispatch on the request's function class kind.
Hypothesis solve_erm(const ErmRequest& request);

/// Pluggable oracle type used by the game solver.
using ErmOracle = std::function<Hypothesis(const ErmRequest&)>;

}  // namespace mrokit

#endif  // MROKIT_ORACLES_HPP
