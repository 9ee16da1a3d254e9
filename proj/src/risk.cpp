#include "mrokit/risk.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include "mrokit/io.hpp"
#include "mrokit/scenarios.hpp"

namespace mrokit {

double empirical_risk(const Hypothesis& hypothesis, std::size_t weight_index,
                      const Dataset& dataset, const LossSpec& loss) {
  if (weight_index >= dataset.weight_count())
    throw std::invalid_argument("weight index out of range");
  double acc = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Sample& z = dataset.sample(i);
    acc += dataset.weight(i, weight_index) * loss(z.label, hypothesis.predict(z));
  }
  return acc / static_cast<double>(dataset.size());
}

std::vector<double> per_weight_empirical_risks(const Hypothesis& hypothesis,
                                               const Dataset& dataset, const LossSpec& loss) {
  const std::size_t W = dataset.weight_count();
  std::vector<double> acc(W, 0.0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Sample& z = dataset.sample(i);
    const double l = loss(z.label, hypothesis.predict(z));
    for (std::size_t w = 0; w < W; ++w) acc[w] += dataset.weight(i, w) * l;
  }
  for (double& v : acc) v /= static_cast<double>(dataset.size());
  return acc;
}

RegretReport regret_report_from_risks(std::vector<double> risks,
                                      std::vector<double> baselines) {
  if (risks.size() != baselines.size())
    throw std::invalid_argument("regret report: baseline length mismatch");
  if (risks.empty()) throw std::invalid_argument("regret report: no weights");
  RegretReport report;
  report.per_weight_risk = std::move(risks);
  report.per_weight_baseline = std::move(baselines);
  const std::size_t W = report.per_weight_risk.size();
  report.per_weight_regret.resize(W);
  report.per_weight_regret_clamped.resize(W);
  for (std::size_t w = 0; w < W; ++w) {
    const double r = report.per_weight_risk[w] - report.per_weight_baseline[w];
    report.per_weight_regret[w] = r;
    report.per_weight_regret_clamped[w] = (r < 0.0 && r >= -kOracleTolerance) ? 0.0 : r;
  }
  report.argmax_weight = 0;
  for (std::size_t w = 1; w < W; ++w)
    if (report.per_weight_regret[w] > report.per_weight_regret[report.argmax_weight])
      report.argmax_weight = w;
  report.worst_case_regret = report.per_weight_regret[report.argmax_weight];
  return report;
}

RegretReport empirical_regret_report(const Hypothesis& hypothesis, const Dataset& dataset,
                                     const LossSpec& loss,
                                     const std::vector<double>& baselines) {
  if (baselines.size() != dataset.weight_count())
    throw std::invalid_argument("regret report: baseline length mismatch");
  return regret_report_from_risks(per_weight_empirical_risks(hypothesis, dataset, loss),
                                  baselines);
}

std::vector<double> scaling_coefficients(const ScalingRule& rule, const Dataset& dataset,
                                         const WeightFamily& family) {
  family.validate();
  const std::size_t W = family.size();
  if (dataset.weight_count() != W)
    throw std::invalid_argument("scaling: dataset/family width mismatch");
  std::vector<double> c(W, 1.0);
  switch (rule.kind) {
    case ScalingKind::none:
      return c;
    case ScalingKind::slow: {
      const double root_n = std::sqrt(static_cast<double>(dataset.size()));
      for (std::size_t w = 0; w < W; ++w) {
        const double sigma_hat = std::sqrt(empirical_weight_second_moment(dataset, w));
        c[w] = sigma_hat + family.per_weight_bound[w] / root_n;
        if (!(c[w] > 0.0))
          throw std::invalid_argument("slow scaling degenerate for " + family.names[w]);
      }
      return c;
    }
    case ScalingKind::fast:
      for (std::size_t w = 0; w < W; ++w) {
        c[w] = family.per_weight_bound[w];
        if (!(c[w] > 0.0))
          throw std::invalid_argument("fast scaling needs B_w > 0 for " + family.names[w]);
      }
      return c;
    case ScalingKind::explicit_values:
      if (rule.explicit_coefficients.size() != W)
        throw std::invalid_argument("explicit scaling length mismatch");
      for (double v : rule.explicit_coefficients)
        if (!(v > 0.0) || !std::isfinite(v))
          throw std::invalid_argument("explicit scaling entries must be positive");
      return rule.explicit_coefficients;
  }
  throw std::logic_error("unreachable scaling kind");
}

double population_risk(const Hypothesis& hypothesis, const SyntheticScenario& scenario,
                       std::size_t weight_index, const PopulationMode& mode) {
  if (weight_index >= scenario.family.size())
    throw std::invalid_argument("population risk: weight index out of range");
  if (!scenario.has_exact_support())
    throw std::invalid_argument("scenario has no closed-form support");

  if (mode.kind == PopulationMode::Kind::exact) {
    double acc = 0.0;
    for (std::size_t i = 0; i < scenario.atoms.size(); ++i) {
      const Sample& z = scenario.atoms[i];
      acc += scenario.atom_probs[i] * scenario.atom_weights(i, weight_index) *
             scenario.loss(z.label, hypothesis.predict(z));
    }
    return acc;
  }

  if (mode.sample_count == 0)
    throw std::invalid_argument("monte carlo mode needs a positive sample count");
  std::mt19937_64 rng(mode.seed);
  std::discrete_distribution<std::size_t> pick(scenario.atom_probs.begin(),
                                               scenario.atom_probs.end());
  double acc = 0.0;
  for (std::size_t k = 0; k < mode.sample_count; ++k) {
    const std::size_t i = pick(rng);
    const Sample& z = scenario.atoms[i];
    acc += scenario.atom_weights(i, weight_index) * scenario.loss(z.label, hypothesis.predict(z));
  }
  return acc / static_cast<double>(mode.sample_count);
}

RegretReport population_regret_report(const Hypothesis& hypothesis,
                                      const SyntheticScenario& scenario) {
  const std::vector<Hypothesis> minimizers = population_minimizers(scenario);
  const std::size_t W = scenario.family.size();
  std::vector<double> risks(W), baselines(W);
  for (std::size_t w = 0; w < W; ++w) {
    risks[w] = population_risk(hypothesis, scenario, w, PopulationMode::exact());
    baselines[w] = population_risk(minimizers[w], scenario, w, PopulationMode::exact());
  }
  return regret_report_from_risks(std::move(risks), std::move(baselines));
}

void write_regret_report_csv(std::ostream& out, const RegretReport& report,
                             const std::vector<std::string>& weight_names) {
  if (weight_names.size() != report.per_weight_risk.size())
    throw std::invalid_argument("report csv: name count mismatch");
  out << "weight_name,risk,baseline,regret\n";
  for (std::size_t w = 0; w < weight_names.size(); ++w) {
    out << weight_names[w] << ',' << format_real(report.per_weight_risk[w]) << ','
        << format_real(report.per_weight_baseline[w]) << ','
        << format_real(report.per_weight_regret_clamped[w]) << '\n';
  }
}

}  // namespace mrokit
