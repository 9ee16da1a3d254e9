#include "mrokit/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace mrokit {

namespace {

// Evaluation backend for one solve: a best response to mixed weights and
// per-weight risks of the response. The sufficient-statistic backends are
// algebraically identical to calling the exact oracle on mixed per-sample
// weights.
class RiskEngine {
 public:
  virtual ~RiskEngine() = default;
  // rho_over_c[w] = rho(w) / c_w
  virtual Hypothesis best_response(const std::vector<double>& rho_over_c) = 0;
  virtual std::vector<double> risks(const Hypothesis& h) = 0;
};

class GenericEngine final : public RiskEngine {
 public:
  GenericEngine(const Dataset& data, const LossSpec& loss, const FunctionClass& cls,
                ErmOracle oracle)
      : data_(data), loss_(loss), cls_(cls), oracle_(std::move(oracle)) {}

  Hypothesis best_response(const std::vector<double>& rho_over_c) override {
    std::vector<double> omega(data_.size(), 0.0);
    for (std::size_t i = 0; i < data_.size(); ++i) {
      double acc = 0.0;
      for (std::size_t w = 0; w < rho_over_c.size(); ++w)
        acc += rho_over_c[w] * data_.weight(i, w);
      omega[i] = acc;
    }
    ErmRequest request{&omega, &data_, loss_, cls_, 1e-8};
    return oracle_(request);
  }

  std::vector<double> risks(const Hypothesis& h) override {
    return per_weight_empirical_risks(h, data_, loss_);
  }

 private:
  const Dataset& data_;
  LossSpec loss_;
  FunctionClass cls_;
  ErmOracle oracle_;
};

// Finite class: the |F| x |W| risk table is precomputed once, after which
// every round costs O(|F| |W|).
class FiniteEngine final : public RiskEngine {
 public:
  FiniteEngine(const Dataset& data, const LossSpec& loss, const FunctionClass& cls)
      : cls_(cls), risk_table_(cls.finite_size()) {
    for (std::size_t k = 0; k < cls.finite_size(); ++k)
      risk_table_[k] = per_weight_empirical_risks(Hypothesis::finite(cls, k), data, loss);
  }

  Hypothesis best_response(const std::vector<double>& rho_over_c) override {
    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t k = 0; k < risk_table_.size(); ++k) {
      double value = 0.0;
      for (std::size_t w = 0; w < rho_over_c.size(); ++w)
        value += rho_over_c[w] * risk_table_[k][w];
      if (k == 0 || value < best_value) {
        best = k;
        best_value = value;
      }
    }
    return Hypothesis::finite(cls_, best);
  }

  std::vector<double> risks(const Hypothesis& h) override { return risk_table_[h.index()]; }

  const std::vector<std::vector<double>>& risk_table() const { return risk_table_; }

 private:
  FunctionClass cls_;
  std::vector<std::vector<double>> risk_table_;
};

// Interval class with squared loss: R_w(c) = a_w c^2 - 2 b_w c + d_w with
// a_w = mean(W), b_w = mean(W y), d_w = mean(W y^2). The best response is
// the ratio of mixed moments, clipped.
class IntervalEngine final : public RiskEngine {
 public:
  IntervalEngine(const Dataset& data, const LossSpec& loss, const FunctionClass& cls)
      : cls_(cls) {
    if (loss.kind != LossKind::squared)
      throw std::invalid_argument("interval engine needs squared loss");
    const std::size_t W = data.weight_count();
    a_.assign(W, 0.0);
    b_.assign(W, 0.0);
    d_.assign(W, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double y = data.sample(i).label;
      for (std::size_t w = 0; w < W; ++w) {
        const double v = data.weight(i, w);
        a_[w] += v;
        b_[w] += v * y;
        d_[w] += v * y * y;
      }
    }
    const double n = static_cast<double>(data.size());
    for (std::size_t w = 0; w < W; ++w) {
      a_[w] /= n;
      b_[w] /= n;
      d_[w] /= n;
    }
  }

  Hypothesis best_response(const std::vector<double>& rho_over_c) override {
    double num = 0.0, den = 0.0;
    for (std::size_t w = 0; w < rho_over_c.size(); ++w) {
      num += rho_over_c[w] * b_[w];
      den += rho_over_c[w] * a_[w];
    }
    const double c = std::clamp(num / den, -cls_.radius, cls_.radius);
    return Hypothesis::constant(cls_, c);
  }

  std::vector<double> risks(const Hypothesis& h) override {
    const double c = h.parameters()[0];
    std::vector<double> out(a_.size());
    for (std::size_t w = 0; w < a_.size(); ++w) out[w] = a_[w] * c * c - 2.0 * b_[w] * c + d_[w];
    return out;
  }

 private:
  FunctionClass cls_;
  std::vector<double> a_, b_, d_;
};

std::unique_ptr<RiskEngine> make_engine(const Dataset& data, const LossSpec& loss,
                                        const FunctionClass& cls, const ErmOracle& oracle) {
  if (!oracle) {
    if (cls.kind == FunctionClassKind::finite)
      return std::make_unique<FiniteEngine>(data, loss, cls);
    if (cls.kind == FunctionClassKind::interval_constant && loss.kind == LossKind::squared)
      return std::make_unique<IntervalEngine>(data, loss, cls);
    return std::make_unique<GenericEngine>(data, loss, cls, solve_erm);
  }
  return std::make_unique<GenericEngine>(data, loss, cls, oracle);
}

// Columns with no positive entry make the per-weight baseline (and the
// sufficient-statistic engines) meaningless; fail with a clear message.
void require_active_columns(const Dataset& dataset, const WeightFamily& family) {
  for (std::size_t w = 0; w < family.size(); ++w) {
    bool any = false;
    for (std::size_t i = 0; i < dataset.size() && !any; ++i)
      any = dataset.weight(i, w) > 0.0;
    if (!any)
      throw std::invalid_argument("degenerate all-zero weight column: " + family.names[w]);
  }
}

std::vector<double> baseline_values(RiskEngine& engine, std::size_t W,
                                    std::vector<Hypothesis>* minimizers) {
  std::vector<double> values(W);
  std::vector<double> one_hot(W, 0.0);
  for (std::size_t w = 0; w < W; ++w) {
    one_hot[w] = 1.0;
    Hypothesis h = engine.best_response(one_hot);
    values[w] = engine.risks(h)[w];
    if (minimizers) minimizers->push_back(std::move(h));
    one_hot[w] = 0.0;
  }
  return values;
}

}  // namespace

BaselineSet precompute_baselines(const Dataset& dataset, const WeightFamily& family,
                                 const ErmOracle& oracle, const LossSpec& loss,
                                 const FunctionClass& function_class) {
  family.validate();
  if (dataset.weight_count() != family.size())
    throw std::invalid_argument("baselines: dataset/family width mismatch");
  require_active_columns(dataset, family);
  auto engine = make_engine(dataset, loss, function_class, oracle);
  BaselineSet set;
  set.minimizers.reserve(family.size());
  set.values = baseline_values(*engine, family.size(), &set.minimizers);
  return set;
}

double payoff_from_risk(double risk, std::size_t weight_index, ObjectiveMode mode,
                        const std::vector<double>& baselines,
                        const std::vector<double>& scaling) {
  switch (mode) {
    case ObjectiveMode::mro:
      return risk - baselines[weight_index];
    case ObjectiveMode::smro:
      return (risk - baselines[weight_index]) / scaling[weight_index];
    case ObjectiveMode::dro:
      return risk;
  }
  throw std::logic_error("unreachable objective mode");
}

double default_eta(double payoff_range, std::size_t rounds, std::size_t family_size) {
  if (rounds == 0) throw std::invalid_argument("default_eta: rounds must be >= 1");
  if (family_size <= 1) return 0.0;
  if (!(payoff_range > 0.0)) throw std::invalid_argument("default_eta: range must be > 0");
  return std::sqrt(std::log(static_cast<double>(family_size)) /
                   (payoff_range * payoff_range * static_cast<double>(rounds)));
}

GameSolution solve_game(const Dataset& dataset, const WeightFamily& family,
                        const ErmOracle& oracle, const LossSpec& loss,
                        const FunctionClass& function_class, const Objective& objective,
                        std::size_t rounds, std::optional<double> eta_override) {
  family.validate();
  function_class.validate();
  if (rounds == 0) throw std::invalid_argument("solve_game: rounds must be >= 1");
  if (dataset.weight_count() != family.size())
    throw std::invalid_argument("solve_game: dataset/family width mismatch");
  require_active_columns(dataset, family);

  const std::size_t W = family.size();
  std::vector<double> scaling(W, 1.0);
  if (objective.mode == ObjectiveMode::smro)
    scaling = scaling_coefficients(objective.scaling, dataset, family);

  auto engine = make_engine(dataset, loss, function_class, oracle);

  GameSolution solution;
  solution.mode = objective.mode;
  solution.scaling = scaling;
  solution.rounds = rounds;
  solution.per_weight_baselines = baseline_values(*engine, W, nullptr);

  double range = family.family_bound * loss.bound;
  if (objective.mode == ObjectiveMode::smro) {
    range = 0.0;
    for (std::size_t w = 0; w < W; ++w)
      range = std::max(range, family.per_weight_bound[w] * loss.bound / scaling[w]);
  }
  solution.payoff_range = range;
  solution.eta = eta_override ? *eta_override : default_eta(range, rounds, W);

  if (W == 1) {
    // Degenerate game: rho is constant, one oracle call decides everything.
    const std::vector<double> rho_over_c = {1.0 / scaling[0]};
    Hypothesis h = engine->best_response(rho_over_c);
    const double payoff = payoff_from_risk(engine->risks(h)[0], 0, objective.mode,
                                           solution.per_weight_baselines, scaling);
    solution.iterate_hypotheses.push_back(std::move(h));
    solution.rho_final = {1.0};
    solution.mixture_value = payoff;
    solution.iterate_sup_avg = payoff;
    solution.best_dual_value = payoff;
    solution.best_iterate = 0;
    solution.best_iterate_payoff = payoff;
    solution.gap_certificate = 0.0;
    return solution;
  }

  std::vector<double> rho(W, 1.0 / static_cast<double>(W));
  std::vector<double> rho_over_c(W), payoff(W), payoff_sum(W, 0.0);
  double sup_sum = 0.0;
  solution.iterate_hypotheses.reserve(rounds);
  solution.best_dual_value = -std::numeric_limits<double>::infinity();
  solution.best_iterate_payoff = std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t < rounds; ++t) {
    for (std::size_t w = 0; w < W; ++w) rho_over_c[w] = rho[w] / scaling[w];
    Hypothesis f_t = engine->best_response(rho_over_c);
    const std::vector<double> risks = engine->risks(f_t);

    double sup_payoff = -std::numeric_limits<double>::infinity();
    double dual = 0.0;
    for (std::size_t w = 0; w < W; ++w) {
      payoff[w] =
          payoff_from_risk(risks[w], w, objective.mode, solution.per_weight_baselines, scaling);
      if (!std::isfinite(payoff[w])) throw std::runtime_error("solve_game: non-finite payoff");
      payoff_sum[w] += payoff[w];
      sup_payoff = std::max(sup_payoff, payoff[w]);
      dual += rho[w] * payoff[w];
    }
    sup_sum += sup_payoff;
    solution.best_dual_value = std::max(solution.best_dual_value, dual);
    if (sup_payoff < solution.best_iterate_payoff) {
      solution.best_iterate_payoff = sup_payoff;
      solution.best_iterate = t;
    }

    // Exponentiated gradient step on the weight player, max-shifted for
    // numerical stability (the shift cancels in the normalization).
    double mass = 0.0;
    for (std::size_t w = 0; w < W; ++w) {
      rho[w] *= std::exp(solution.eta * (payoff[w] - sup_payoff));
      mass += rho[w];
    }
    for (std::size_t w = 0; w < W; ++w) rho[w] /= mass;

    solution.iterate_hypotheses.push_back(std::move(f_t));
  }

  solution.rho_final = rho;
  const double T = static_cast<double>(rounds);
  solution.iterate_sup_avg = sup_sum / T;
  double mixture = -std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < W; ++w) mixture = std::max(mixture, payoff_sum[w] / T);
  solution.mixture_value = mixture;

  if (function_class.kind == FunctionClassKind::finite && function_class.finite_size() <= 8 &&
      W <= 8) {
    auto* finite_engine = dynamic_cast<FiniteEngine*>(engine.get());
    const std::size_t K = function_class.finite_size();
    Matrix game(K, W);
    for (std::size_t k = 0; k < K; ++k) {
      const std::vector<double> risks =
          finite_engine != nullptr
              ? finite_engine->risk_table()[k]
              : engine->risks(Hypothesis::finite(function_class, k));
      for (std::size_t w = 0; w < W; ++w)
        game(k, w) = payoff_from_risk(risks[w], w, objective.mode,
                                      solution.per_weight_baselines, scaling);
    }
    solution.gap_certificate = solution.mixture_value - mixed_game_value(game).value;
  } else {
    solution.gap_certificate = solution.mixture_value - solution.best_dual_value;
  }
  return solution;
}

double gap_certificate(const GameSolution& solution, const Dataset& dataset,
                       const WeightFamily& family, const LossSpec& loss,
                       const FunctionClass& function_class, const Objective& objective) {
  if (function_class.kind == FunctionClassKind::finite && function_class.finite_size() <= 8 &&
      family.size() <= 8) {
    const std::size_t K = function_class.finite_size();
    const std::size_t W = family.size();
    Matrix game(K, W);
    for (std::size_t k = 0; k < K; ++k) {
      const Hypothesis h = Hypothesis::finite(function_class, k);
      const std::vector<double> risks = per_weight_empirical_risks(h, dataset, loss);
      for (std::size_t w = 0; w < W; ++w)
        game(k, w) = payoff_from_risk(risks[w], w, objective.mode,
                                      solution.per_weight_baselines, solution.scaling);
    }
    return solution.mixture_value - mixed_game_value(game).value;
  }
  return solution.mixture_value - solution.best_dual_value;
}

namespace {

// Next k-subset of {0..n-1} in lexicographic order; false when exhausted.
bool next_subset(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t pos = k; pos-- > 0;) {
    if (idx[pos] + (k - pos) < n) {
      ++idx[pos];
      for (std::size_t q = pos + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
      return true;
    }
  }
  return false;
}

struct KernelCandidate {
  bool ok = false;
  double value = 0.0;
  std::vector<double> x, y;
};

KernelCandidate solve_kernel(const Matrix& M, const std::vector<std::size_t>& rows,
                             const std::vector<std::size_t>& cols, double tol) {
  const std::size_t k = rows.size();
  KernelCandidate out;

  // Row strategy x on `rows`: equal payoff v across `cols`, sums to one.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < k; ++i) A(j, i) = M(rows[i], cols[j]);
    A(j, k) = -1.0;
  }
  for (std::size_t i = 0; i < k; ++i) A(k, i) = 1.0;
  rhs(k) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) return out;
  const Eigen::VectorXd xv = lu.solve(rhs);

  // Column strategy y on `cols` against the same sub-game.
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd rhs2 = Eigen::VectorXd::Zero(k + 1);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) B(i, j) = M(rows[i], cols[j]);
    B(i, k) = -1.0;
  }
  for (std::size_t j = 0; j < k; ++j) B(k, j) = 1.0;
  rhs2(k) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu2(B);
  if (!lu2.isInvertible()) return out;
  const Eigen::VectorXd yv = lu2.solve(rhs2);

  const double v = 0.5 * (xv(k) + yv(k));
  if (std::abs(xv(k) - yv(k)) > tol) return out;
  for (std::size_t i = 0; i < k; ++i)
    if (xv(i) < -tol || yv(i) < -tol) return out;

  std::vector<double> x(M.rows(), 0.0), y(M.cols(), 0.0);
  double xs = 0.0, ys = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    x[rows[i]] = std::max(0.0, xv(i));
    y[cols[i]] = std::max(0.0, yv(i));
    xs += x[rows[i]];
    ys += y[cols[i]];
  }
  for (double& e : x) e /= xs;
  for (double& e : y) e /= ys;

  // Global optimality: no row undercuts v against y, no column beats v
  // against x.
  for (std::size_t i = 0; i < M.rows(); ++i) {
    double payoff = 0.0;
    for (std::size_t j = 0; j < M.cols(); ++j) payoff += M(i, j) * y[j];
    if (payoff < v - tol) return out;
  }
  for (std::size_t j = 0; j < M.cols(); ++j) {
    double payoff = 0.0;
    for (std::size_t i = 0; i < M.rows(); ++i) payoff += M(i, j) * x[i];
    if (payoff > v + tol) return out;
  }

  out.ok = true;
  out.value = v;
  out.x = std::move(x);
  out.y = std::move(y);
  return out;
}

}  // namespace

MatrixGameSolution mixed_game_value(const Matrix& payoff) {
  const std::size_t m = payoff.rows();
  const std::size_t n = payoff.cols();
  if (m == 0 || n == 0) throw std::invalid_argument("mixed_game_value: empty matrix");
  if (m > 16 || n > 16)
    throw std::invalid_argument("mixed_game_value: support enumeration limited to 16x16");
  double scale = 1.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(payoff(i, j)))
        throw std::invalid_argument("mixed_game_value: non-finite entry");
      scale = std::max(scale, std::abs(payoff(i, j)));
    }

  for (const double tol : {1e-9 * scale, 1e-7 * scale}) {
    for (std::size_t k = 1; k <= std::min(m, n); ++k) {
      std::vector<std::size_t> rows(k), cols(k);
      std::iota(rows.begin(), rows.end(), 0);
      do {
        std::iota(cols.begin(), cols.end(), 0);
        do {
          KernelCandidate cand = solve_kernel(payoff, rows, cols, tol);
          if (cand.ok)
            return MatrixGameSolution{cand.value, std::move(cand.x), std::move(cand.y)};
        } while (next_subset(cols, n));
      } while (next_subset(rows, m));
    }
  }
  throw std::runtime_error("mixed_game_value: no optimal kernel found");
}

namespace {

// inf_eta { eta + (B/n) sum_i (d_i - eta)_+ } for loss differences d.
double bounded_family_inner_value(std::vector<double> d, double B) {
  const std::size_t n = d.size();
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  const auto k = static_cast<std::size_t>(
      std::max(0.0, std::ceil(static_cast<double>(n) * (1.0 - 1.0 / B) - 1e-9)));
  if (k == 0) return mean;  // B = 1: only the uniform weighting is feasible
  std::sort(d.begin(), d.end());
  const double eta = d[k - 1];
  double hinge = 0.0;
  for (double v : d) hinge += std::max(v - eta, 0.0);
  return eta + B * hinge / static_cast<double>(n);
}

}  // namespace

double worst_case_regret_bounded_family(const Hypothesis& hypothesis, const Dataset& dataset,
                                        const LossSpec& loss,
                                        const FunctionClass& candidate_class, double B) {
  if (!(B >= 1.0))
    throw std::invalid_argument("worst_case_regret_bounded_family: B must be >= 1");
  const std::size_t n = dataset.size();
  std::vector<double> base_losses(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& z = dataset.sample(i);
    base_losses[i] = loss(z.label, hypothesis.predict(z));
  }

  const auto value_against = [&](const Hypothesis& rival) {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Sample& z = dataset.sample(i);
      d[i] = base_losses[i] - loss(z.label, rival.predict(z));
    }
    return bounded_family_inner_value(std::move(d), B);
  };

  if (candidate_class.kind == FunctionClassKind::finite) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < candidate_class.finite_size(); ++k)
      best = std::max(best, value_against(Hypothesis::finite(candidate_class, k)));
    return best;
  }

  if (candidate_class.kind != FunctionClassKind::interval_constant)
    throw std::invalid_argument(
        "worst_case_regret_bounded_family: candidate class must be finite or interval");

  // Grid over [-C, C], then golden-section refinement around the best cell.
  const double C = candidate_class.radius;
  const auto value_at = [&](double c) {
    return value_against(Hypothesis::constant(candidate_class, c));
  };
  const std::size_t grid = 2001;
  double best_c = -C, best = value_at(-C);
  for (std::size_t g = 1; g < grid; ++g) {
    const double c = -C + 2.0 * C * static_cast<double>(g) / static_cast<double>(grid - 1);
    const double v = value_at(c);
    if (v > best) {
      best = v;
      best_c = c;
    }
  }
  const double step = 2.0 * C / static_cast<double>(grid - 1);
  double lo = std::max(-C, best_c - step), hi = std::min(C, best_c + step);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = hi - phi * (hi - lo), c2 = lo + phi * (hi - lo);
  double v1 = value_at(c1), v2 = value_at(c2);
  for (int iter = 0; iter < 80; ++iter) {
    if (v1 < v2) {
      lo = c1;
      c1 = c2;
      v1 = v2;
      c2 = lo + phi * (hi - lo);
      v2 = value_at(c2);
    } else {
      hi = c2;
      c2 = c1;
      v2 = v1;
      c1 = hi - phi * (hi - lo);
      v1 = value_at(c1);
    }
  }
  return std::max(best, std::max(v1, v2));
}

}  // namespace mrokit
