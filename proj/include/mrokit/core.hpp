#ifndef MROKIT_CORE_HPP
#define MROKIT_CORE_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrokit {

/// One observation. `tag` is an optional component identifier used by
/// mixture constructions (e.g. which source distribution the point came
/// from) and by table-valued finite hypotheses.
struct Sample {
  std::vector<double> features;
  double label = 0.0;
  std::optional<int> tag;
};

/// Dense row-major matrix of doubles. Minimal on purpose; the heavy linear
/// algebra lives behind the linear ERM oracle.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Finite family of importance-weight functions, identified by name, with a
/// per-member upper bound and a bound for the whole family.
struct WeightFamily {
  std::vector<std::string> names;
  std::vector<double> per_weight_bound;
  double family_bound = 1.0;

  std::size_t size() const { return names.size(); }

  /// Throws std::invalid_argument if the family is empty, has mismatched
  /// bound/name lengths, a negative member bound, a family bound below 1,
  /// or a member bound exceeding the family bound.
  void validate() const;
};

/// Samples plus the materialized n-by-|W| matrix of importance-weight
/// values. Weight functions are evaluated once at construction time, so the
/// rest of the library never needs a callable weight.
class Dataset {
 public:
  /// Construction enforces: n >= 1, equal feature dimension across samples,
  /// matrix shape (n, |names|), finite nonnegative weight entries, and,
  /// when a label bound is given, |label| <= label_bound.
  Dataset(std::vector<Sample> samples, Matrix weights,
          std::vector<std::string> weight_names,
          std::optional<double> label_bound = std::nullopt);

  std::size_t size() const { return samples_.size(); }
  std::size_t weight_count() const { return weight_names_.size(); }
  std::size_t feature_dim() const { return feature_dim_; }

  const Sample& sample(std::size_t i) const { return samples_[i]; }
  const std::vector<Sample>& samples() const { return samples_; }
  double weight(std::size_t i, std::size_t w) const { return weights_(i, w); }
  const Matrix& weight_matrix() const { return weights_; }
  const std::vector<std::string>& weight_names() const { return weight_names_; }
  std::optional<double> label_bound() const { return label_bound_; }

 private:
  std::vector<Sample> samples_;
  Matrix weights_;
  std::vector<std::string> weight_names_;
  std::size_t feature_dim_ = 0;
  std::optional<double> label_bound_;
};

enum class LossKind { squared, absolute, custom_bounded };

/// Loss with a declared range [0, bound] and Lipschitz constant. The bound
/// is declared rather than inferred because it only enters the default EG
/// step size; evaluation never clamps.
struct LossSpec {
  LossKind kind = LossKind::squared;
  double bound = 1.0;
  double lipschitz = 2.0;
  std::function<double(double label, double prediction)> custom;

  double operator()(double label, double prediction) const;

  static LossSpec squared(double bound = 1.0);
  static LossSpec absolute(double bound = 1.0);
};

enum class FunctionClassKind { finite, interval_constant, linear_l2_ball };

/// Description of the hypothesis space. Finite classes list one prediction
/// table per candidate: a single value means a constant predictor, more
/// values are indexed by the sample tag.
struct FunctionClass {
  FunctionClassKind kind = FunctionClassKind::finite;
  std::vector<std::vector<double>> candidates;  // finite only
  double radius = 0.0;       // interval half-width C, or l2 ball radius r
  std::size_t dimension = 0; // linear only

  static FunctionClass finite(std::vector<std::vector<double>> tables);
  static FunctionClass finite_constants(const std::vector<double>& values);
  static FunctionClass interval(double half_width);
  static FunctionClass linear_ball(std::size_t dim, double radius);

  std::size_t finite_size() const { return candidates.size(); }
  void validate() const;
};

/// A concrete element of a FunctionClass. Constraint membership is checked
/// at construction: finite index in range, |c| <= C, ||beta|| <= r (up to
/// the stated tolerance for iteratively produced vectors).
class Hypothesis {
 public:
  static Hypothesis finite(const FunctionClass& cls, std::size_t index);
  static Hypothesis constant(const FunctionClass& cls, double value);
  static Hypothesis linear(const FunctionClass& cls, std::vector<double> beta,
                           double tolerance = 1e-8);

  double predict(const Sample& z) const;

  FunctionClassKind class_kind() const { return kind_; }
  std::size_t index() const;
  /// Interval: {c}. Linear: beta. Finite: the resolved prediction table.
  const std::vector<double>& parameters() const { return parameters_; }

 private:
  Hypothesis() = default;
  FunctionClassKind kind_ = FunctionClassKind::finite;
  std::size_t index_ = 0;
  bool has_index_ = false;
  std::vector<double> parameters_;
};

struct ValidationReport {
  std::vector<double> column_means;
  bool renormalized = false;
  std::vector<double> column_scale;  // multiplier applied per column (1 if none)
};

struct ValidatedData {
  Dataset dataset;
  WeightFamily family;
  ValidationReport report;
};

/// Checks weight columns against the family bounds and, with
/// `renormalize`, rescales every column to sample mean one (adjusting the
/// declared bounds by the same factor). Renormalization is opt-in: it
/// changes the estimand, so by default the declared family is trusted.
///
/// Throws std::invalid_argument on: name mismatch, negative entries,
/// entries above the member bound, or a zero-mean (degenerate) column.
ValidatedData validate_dataset(const Dataset& dataset, const WeightFamily& family,
                               bool renormalize);

/// (1/n) sum_i w(z_i)^2 for the given weight column.
double empirical_weight_second_moment(const Dataset& dataset, std::size_t weight_index);

}  // namespace mrokit

#endif  // MROKIT_CORE_HPP
