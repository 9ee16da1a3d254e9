#include "mrokit/core.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace mrokit {

void WeightFamily::validate() const {
  if (names.empty()) throw std::invalid_argument("weight family must be nonempty");
  if (per_weight_bound.size() != names.size())
    throw std::invalid_argument("weight family: bounds/names length mismatch");
  if (!(family_bound >= 1.0))
    throw std::invalid_argument("weight family: family bound must be >= 1");
  for (std::size_t w = 0; w < names.size(); ++w) {
    if (!(per_weight_bound[w] >= 0.0))
      throw std::invalid_argument("weight family: negative bound for " + names[w]);
    if (per_weight_bound[w] > family_bound)
      throw std::invalid_argument("weight family: member bound exceeds family bound for " +
                                  names[w]);
  }
}

Dataset::Dataset(std::vector<Sample> samples, Matrix weights,
                 std::vector<std::string> weight_names, std::optional<double> label_bound)
    : samples_(std::move(samples)),
      weights_(std::move(weights)),
      weight_names_(std::move(weight_names)),
      label_bound_(label_bound) {
  if (samples_.empty()) throw std::invalid_argument("dataset must contain at least one sample");
  feature_dim_ = samples_.front().features.size();
  for (const Sample& z : samples_) {
    if (z.features.size() != feature_dim_)
      throw std::invalid_argument("dataset: inconsistent feature dimension");
    if (!std::isfinite(z.label)) throw std::invalid_argument("dataset: non-finite label");
    if (label_bound_ && std::abs(z.label) > *label_bound_)
      throw std::invalid_argument("dataset: label exceeds declared bound");
  }
  if (weights_.rows() != samples_.size() || weights_.cols() != weight_names_.size())
    throw std::invalid_argument("dataset: weight matrix shape mismatch");
  for (std::size_t i = 0; i < weights_.rows(); ++i)
    for (std::size_t w = 0; w < weights_.cols(); ++w) {
      const double v = weights_(i, w);
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("dataset: weight entries must be finite and >= 0");
    }
}

double LossSpec::operator()(double label, double prediction) const {
  switch (kind) {
    case LossKind::squared: {
      const double d = prediction - label;
      return d * d;
    }
    case LossKind::absolute:
      return std::abs(prediction - label);
    case LossKind::custom_bounded:
      if (!custom) throw std::invalid_argument("custom loss requested but no callable set");
      return custom(label, prediction);
  }
  throw std::logic_error("unreachable loss kind");
}

LossSpec LossSpec::squared(double bound) { return LossSpec{LossKind::squared, bound, 2.0, {}}; }

LossSpec LossSpec::absolute(double bound) { return LossSpec{LossKind::absolute, bound, 1.0, {}}; }

FunctionClass FunctionClass::finite(std::vector<std::vector<double>> tables) {
  FunctionClass cls;
  cls.kind = FunctionClassKind::finite;
  cls.candidates = std::move(tables);
  cls.validate();
  return cls;
}

FunctionClass FunctionClass::finite_constants(const std::vector<double>& values) {
  std::vector<std::vector<double>> tables;
  tables.reserve(values.size());
  for (double v : values) tables.push_back({v});
  return finite(std::move(tables));
}

FunctionClass FunctionClass::interval(double half_width) {
  FunctionClass cls;
  cls.kind = FunctionClassKind::interval_constant;
  cls.radius = half_width;
  cls.validate();
  return cls;
}

FunctionClass FunctionClass::linear_ball(std::size_t dim, double radius) {
  FunctionClass cls;
  cls.kind = FunctionClassKind::linear_l2_ball;
  cls.dimension = dim;
  cls.radius = radius;
  cls.validate();
  return cls;
}

void FunctionClass::validate() const {
  switch (kind) {
    case FunctionClassKind::finite:
      if (candidates.empty()) throw std::invalid_argument("finite class must be nonempty");
      for (const auto& table : candidates)
        if (table.empty()) throw std::invalid_argument("finite candidate with empty table");
      return;
    case FunctionClassKind::interval_constant:
      if (!(radius > 0.0)) throw std::invalid_argument("interval class needs radius > 0");
      return;
    case FunctionClassKind::linear_l2_ball:
      if (!(radius > 0.0)) throw std::invalid_argument("l2 ball needs radius > 0");
      if (dimension == 0) throw std::invalid_argument("l2 ball needs dimension >= 1");
      return;
  }
  throw std::logic_error("unreachable class kind");
}

Hypothesis Hypothesis::finite(const FunctionClass& cls, std::size_t index) {
  if (cls.kind != FunctionClassKind::finite)
    throw std::invalid_argument("finite hypothesis requires a finite class");
  if (index >= cls.candidates.size())
    throw std::invalid_argument("finite hypothesis index out of range");
  Hypothesis h;
  h.kind_ = FunctionClassKind::finite;
  h.index_ = index;
  h.has_index_ = true;
  h.parameters_ = cls.candidates[index];
  return h;
}

Hypothesis Hypothesis::constant(const FunctionClass& cls, double value) {
  if (cls.kind != FunctionClassKind::interval_constant)
    throw std::invalid_argument("constant hypothesis requires an interval class");
  if (!std::isfinite(value) || std::abs(value) > cls.radius)
    throw std::invalid_argument("constant hypothesis outside [-C, C]");
  Hypothesis h;
  h.kind_ = FunctionClassKind::interval_constant;
  h.parameters_ = {value};
  return h;
}

Hypothesis Hypothesis::linear(const FunctionClass& cls, std::vector<double> beta,
                              double tolerance) {
  if (cls.kind != FunctionClassKind::linear_l2_ball)
    throw std::invalid_argument("linear hypothesis requires an l2 ball class");
  if (beta.size() != cls.dimension)
    throw std::invalid_argument("linear hypothesis dimension mismatch");
  double sq = 0.0;
  for (double b : beta) {
    if (!std::isfinite(b)) throw std::invalid_argument("linear hypothesis with non-finite entry");
    sq += b * b;
  }
  if (std::sqrt(sq) > cls.radius + tolerance)
    throw std::invalid_argument("linear hypothesis outside the l2 ball");
  Hypothesis h;
  h.kind_ = FunctionClassKind::linear_l2_ball;
  h.parameters_ = std::move(beta);
  return h;
}

double Hypothesis::predict(const Sample& z) const {
  switch (kind_) {
    case FunctionClassKind::finite:
      if (parameters_.size() == 1) return parameters_[0];
      if (!z.tag) throw std::invalid_argument("table hypothesis needs a tagged sample");
      if (*z.tag < 0 || static_cast<std::size_t>(*z.tag) >= parameters_.size())
        throw std::invalid_argument("sample tag outside hypothesis table");
      return parameters_[static_cast<std::size_t>(*z.tag)];
    case FunctionClassKind::interval_constant:
      return parameters_[0];
    case FunctionClassKind::linear_l2_ball: {
      if (z.features.size() != parameters_.size())
        throw std::invalid_argument("feature dimension mismatch in predict");
      double acc = 0.0;
      for (std::size_t j = 0; j < parameters_.size(); ++j) acc += parameters_[j] * z.features[j];
      return acc;
    }
  }
  throw std::logic_error("unreachable hypothesis kind");
}

std::size_t Hypothesis::index() const {
  if (!has_index_) throw std::logic_error("hypothesis has no finite index");
  return index_;
}

ValidatedData validate_dataset(const Dataset& dataset, const WeightFamily& family,
                               bool renormalize) {
  family.validate();
  if (dataset.weight_names() != family.names)
    throw std::invalid_argument("dataset weight columns do not match the family names");

  const std::size_t n = dataset.size();
  const std::size_t W = family.size();
  ValidationReport report;
  report.column_means.resize(W);
  report.column_scale.assign(W, 1.0);
  report.renormalized = renormalize;

  for (std::size_t w = 0; w < W; ++w) {
    // Shifted sum: exact for constant columns, better conditioned otherwise.
    const double anchor = dataset.weight(0, w);
    double shifted = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = dataset.weight(i, w);
      if (v < 0.0)
        throw std::invalid_argument("negative weight entry in column " + family.names[w]);
      shifted += v - anchor;
    }
    const double mean = anchor + shifted / static_cast<double>(n);
    report.column_means[w] = mean;
    if (mean == 0.0)
      throw std::invalid_argument("degenerate weight column (mean 0): " + family.names[w]);
  }

  if (!renormalize) {
    for (std::size_t w = 0; w < W; ++w)
      for (std::size_t i = 0; i < n; ++i)
        if (dataset.weight(i, w) > family.per_weight_bound[w])
          throw std::invalid_argument("weight entry exceeds declared bound in column " +
                                      family.names[w]);
    return ValidatedData{dataset, family, std::move(report)};
  }

  Matrix scaled(n, W);
  WeightFamily scaled_family = family;
  for (std::size_t w = 0; w < W; ++w) {
    const double mean = report.column_means[w];
    report.column_scale[w] = 1.0 / mean;
    scaled_family.per_weight_bound[w] = family.per_weight_bound[w] / mean;
    for (std::size_t i = 0; i < n; ++i) {
      scaled(i, w) = dataset.weight(i, w) / mean;
      if (scaled(i, w) > scaled_family.per_weight_bound[w])
        throw std::invalid_argument("weight entry exceeds declared bound in column " +
                                    family.names[w]);
    }
  }
  scaled_family.family_bound = family.family_bound;
  for (double b : scaled_family.per_weight_bound)
    scaled_family.family_bound = std::max(scaled_family.family_bound, b);

  Dataset out(dataset.samples(), std::move(scaled), dataset.weight_names(),
              dataset.label_bound());
  return ValidatedData{std::move(out), std::move(scaled_family), std::move(report)};
}

double empirical_weight_second_moment(const Dataset& dataset, std::size_t weight_index) {
  if (weight_index >= dataset.weight_count())
    throw std::invalid_argument("weight index out of range");
  double acc = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double v = dataset.weight(i, weight_index);
    acc += v * v;
  }
  return acc / static_cast<double>(dataset.size());
}

}  // namespace mrokit
