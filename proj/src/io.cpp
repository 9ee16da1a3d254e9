#include "mrokit/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"

namespace mrokit {

using nlohmann::json;

std::string format_real(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

namespace {

void check_keys(const json& object, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!object.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
  for (const auto& item : object.items())
    if (allowed.find(item.key()) == allowed.end())
      throw std::invalid_argument(where + ": unknown key '" + item.key() + "'");
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

std::string real_array(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_real(values[i]);
  }
  return out + "]";
}

std::string string_array(const std::vector<std::string>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += '"' + escape(values[i]) + '"';
  }
  return out + "]";
}

}  // namespace

void write_dataset_jsonl(std::ostream& out, const Dataset& dataset) {
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Sample& z = dataset.sample(i);
    out << "{\"features\":" << real_array(z.features)
        << ",\"label\":" << format_real(z.label);
    if (z.tag) out << ",\"tag\":" << *z.tag;
    out << ",\"weights\":{";
    for (std::size_t w = 0; w < dataset.weight_count(); ++w) {
      if (w > 0) out << ',';
      out << '"' << escape(dataset.weight_names()[w])
          << "\":" << format_real(dataset.weight(i, w));
    }
    out << "}}\n";
  }
}

Dataset read_dataset_jsonl(std::istream& in, const std::vector<std::string>& expected_names) {
  std::vector<Sample> samples;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record = json::parse(line);
    check_keys(record, {"features", "label", "tag", "weights"},
               "dataset line " + std::to_string(line_number));
    Sample z;
    z.features = record.at("features").get<std::vector<double>>();
    z.label = record.at("label").get<double>();
    if (record.contains("tag")) z.tag = record.at("tag").get<int>();
    const json& weights = record.at("weights");
    std::vector<double> row;
    row.reserve(expected_names.size());
    if (!weights.is_object() || weights.size() != expected_names.size())
      throw std::invalid_argument("dataset line " + std::to_string(line_number) +
                                  ": weights do not match the family");
    for (const std::string& name : expected_names) {
      if (!weights.contains(name))
        throw std::invalid_argument("dataset line " + std::to_string(line_number) +
                                    ": missing weight '" + name + "'");
      row.push_back(weights.at(name).get<double>());
    }
    samples.push_back(std::move(z));
    rows.push_back(std::move(row));
  }
  if (samples.empty()) throw std::invalid_argument("dataset file has no samples");
  Matrix weights(samples.size(), expected_names.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t w = 0; w < expected_names.size(); ++w) weights(i, w) = rows[i][w];
  return Dataset(std::move(samples), std::move(weights), expected_names);
}

std::string weight_family_to_json(const WeightFamily& family) {
  return "{\"names\":" + string_array(family.names) +
         ",\"per_weight_bound\":" + real_array(family.per_weight_bound) +
         ",\"family_bound\":" + format_real(family.family_bound) + "}";
}

std::string function_class_to_json(const FunctionClass& cls) {
  switch (cls.kind) {
    case FunctionClassKind::finite: {
      std::string out = "{\"kind\":\"finite\",\"candidates\":[";
      for (std::size_t k = 0; k < cls.candidates.size(); ++k) {
        if (k > 0) out += ',';
        out += real_array(cls.candidates[k]);
      }
      return out + "]}";
    }
    case FunctionClassKind::interval_constant:
      return "{\"kind\":\"interval_constant\",\"radius\":" + format_real(cls.radius) + "}";
    case FunctionClassKind::linear_l2_ball:
      return "{\"kind\":\"linear_l2_ball\",\"dimension\":" + std::to_string(cls.dimension) +
             ",\"radius\":" + format_real(cls.radius) + "}";
  }
  throw std::logic_error("unreachable class kind");
}

std::string loss_to_json(const LossSpec& loss) {
  const char* kind = loss.kind == LossKind::squared ? "squared" : "absolute";
  if (loss.kind == LossKind::custom_bounded)
    throw std::invalid_argument("custom losses are not serializable");
  return std::string("{\"kind\":\"") + kind + "\",\"bound\":" + format_real(loss.bound) +
         ",\"lipschitz\":" + format_real(loss.lipschitz) + "}";
}

namespace {

WeightFamily parse_weight_family_json(const json& j) {
  check_keys(j, {"names", "per_weight_bound", "family_bound"}, "family");
  WeightFamily family;
  family.names = j.at("names").get<std::vector<std::string>>();
  family.per_weight_bound = j.at("per_weight_bound").get<std::vector<double>>();
  family.family_bound = j.at("family_bound").get<double>();
  family.validate();
  return family;
}

FunctionClass parse_function_class_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "finite") {
    check_keys(j, {"kind", "candidates"}, "class");
    return FunctionClass::finite(j.at("candidates").get<std::vector<std::vector<double>>>());
  }
  if (kind == "interval_constant") {
    check_keys(j, {"kind", "radius"}, "class");
    return FunctionClass::interval(j.at("radius").get<double>());
  }
  if (kind == "linear_l2_ball") {
    check_keys(j, {"kind", "dimension", "radius"}, "class");
    return FunctionClass::linear_ball(j.at("dimension").get<std::size_t>(),
                                      j.at("radius").get<double>());
  }
  throw std::invalid_argument("class: unknown kind '" + kind + "'");
}

LossSpec parse_loss_json(const json& j) {
  check_keys(j, {"kind", "bound", "lipschitz"}, "loss");
  const std::string kind = j.at("kind").get<std::string>();
  LossSpec loss;
  if (kind == "squared")
    loss.kind = LossKind::squared;
  else if (kind == "absolute")
    loss.kind = LossKind::absolute;
  else
    throw std::invalid_argument("loss: unknown kind '" + kind + "'");
  if (j.contains("bound")) loss.bound = j.at("bound").get<double>();
  if (j.contains("lipschitz")) loss.lipschitz = j.at("lipschitz").get<double>();
  if (!(loss.bound > 0.0)) throw std::invalid_argument("loss: bound must be positive");
  return loss;
}

ScalingRule parse_scaling_json(const json& j) {
  check_keys(j, {"kind", "coefficients"}, "scaling");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") return ScalingRule::none();
  if (kind == "slow") return ScalingRule::slow();
  if (kind == "fast") return ScalingRule::fast();
  if (kind == "explicit")
    return ScalingRule::explicit_values(j.at("coefficients").get<std::vector<double>>());
  throw std::invalid_argument("scaling: unknown kind '" + kind + "'");
}

ObjectiveMode parse_objective_mode(const std::string& name) {
  if (name == "mro") return ObjectiveMode::mro;
  if (name == "smro") return ObjectiveMode::smro;
  if (name == "dro") return ObjectiveMode::dro;
  throw std::invalid_argument("objective: unknown mode '" + name + "'");
}

}  // namespace

WeightFamily parse_weight_family(const std::string& text) {
  return parse_weight_family_json(json::parse(text));
}
FunctionClass parse_function_class(const std::string& text) {
  return parse_function_class_json(json::parse(text));
}
LossSpec parse_loss(const std::string& text) { return parse_loss_json(json::parse(text)); }

const char* objective_mode_name(ObjectiveMode mode) {
  switch (mode) {
    case ObjectiveMode::mro: return "mro";
    case ObjectiveMode::smro: return "smro";
    case ObjectiveMode::dro: return "dro";
  }
  return "?";
}

const char* scaling_kind_name(ScalingKind kind) {
  switch (kind) {
    case ScalingKind::none: return "none";
    case ScalingKind::slow: return "slow";
    case ScalingKind::fast: return "fast";
    case ScalingKind::explicit_values: return "explicit";
  }
  return "?";
}

std::string solution_to_json(const GameSolution& solution,
                             const std::vector<std::string>& weight_names) {
  const Hypothesis& best = solution.iterate_hypotheses[solution.best_iterate];
  const char* class_kind = best.class_kind() == FunctionClassKind::finite
                               ? "finite"
                               : best.class_kind() == FunctionClassKind::interval_constant
                                     ? "interval_constant"
                                     : "linear_l2_ball";
  std::string out = "{";
  out += "\"objective\":\"" + std::string(objective_mode_name(solution.mode)) + "\"";
  out += ",\"T\":" + std::to_string(solution.rounds);
  out += ",\"eta\":" + format_real(solution.eta);
  out += ",\"payoff_range\":" + format_real(solution.payoff_range);
  out += ",\"weight_names\":" + string_array(weight_names);
  out += ",\"scaling\":" + real_array(solution.scaling);
  out += ",\"rho_final\":" + real_array(solution.rho_final);
  out += ",\"per_weight_baselines\":" + real_array(solution.per_weight_baselines);
  out += ",\"mixture_value\":" + format_real(solution.mixture_value);
  out += ",\"iterate_sup_avg\":" + format_real(solution.iterate_sup_avg);
  out += ",\"best_dual_value\":" + format_real(solution.best_dual_value);
  out += ",\"gap_certificate\":" + format_real(solution.gap_certificate);
  out += ",\"best_iterate\":{\"index\":" + std::to_string(solution.best_iterate);
  out += ",\"payoff\":" + format_real(solution.best_iterate_payoff);
  out += ",\"class_kind\":\"" + std::string(class_kind) + "\"";
  out += ",\"parameters\":" + real_array(best.parameters());
  out += "}}";
  return out;
}

std::string regret_report_to_json(const RegretReport& report,
                                  const std::vector<std::string>& weight_names) {
  std::string out = "{";
  out += "\"weight_names\":" + string_array(weight_names);
  out += ",\"risk\":" + real_array(report.per_weight_risk);
  out += ",\"baseline\":" + real_array(report.per_weight_baseline);
  out += ",\"regret\":" + real_array(report.per_weight_regret);
  out += ",\"regret_clamped\":" + real_array(report.per_weight_regret_clamped);
  out += ",\"worst_case_regret\":" + format_real(report.worst_case_regret);
  out += ",\"argmax_weight\":" + std::to_string(report.argmax_weight);
  return out + "}";
}

void write_sweep_csv(std::ostream& out, const RateSweepResult& result) {
  out << "n,replicate,metric\n";
  for (std::size_t ni = 0; ni < result.n_grid.size(); ++ni)
    for (std::size_t r = 0; r < result.metrics[ni].size(); ++r)
      out << result.n_grid[ni] << ',' << r << ',' << format_real(result.metrics[ni][r])
          << '\n';
}

std::string sweep_summary_json(const RateSweepResult& result, const std::string& scenario,
                               const std::string& method, const std::string& metric) {
  std::string out = "{";
  out += "\"scenario\":\"" + escape(scenario) + "\"";
  out += ",\"method\":\"" + escape(method) + "\"";
  out += ",\"metric\":\"" + escape(metric) + "\"";
  out += ",\"n_grid\":[";
  for (std::size_t i = 0; i < result.n_grid.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(result.n_grid[i]);
  }
  out += "]";
  out += ",\"per_n_median_metric\":" + real_array(result.per_n_median_metric);
  out += ",\"fitted_slope\":" + format_real(result.fitted_slope);
  out += ",\"replicates\":" + std::to_string(result.replicates);
  out += ",\"seed\":" + std::to_string(result.seed);
  return out + "}";
}

SolveConfig parse_solve_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  check_keys(j,
             {"objective", "scaling", "T", "eta", "seed", "oracle", "renormalize", "loss",
              "class", "family"},
             "solve config");
  SolveConfig config;
  config.objective.mode = parse_objective_mode(j.at("objective").get<std::string>());
  if (j.contains("scaling")) config.objective.scaling = parse_scaling_json(j.at("scaling"));
  if (config.objective.mode == ObjectiveMode::smro &&
      config.objective.scaling.kind == ScalingKind::none && !j.contains("scaling"))
    throw std::invalid_argument("solve config: smro requires a scaling rule");
  if (j.contains("T")) config.rounds = j.at("T").get<std::size_t>();
  if (config.rounds == 0) throw std::invalid_argument("solve config: T must be >= 1");
  if (j.contains("eta")) config.eta = j.at("eta").get<double>();
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("renormalize")) config.renormalize = j.at("renormalize").get<bool>();
  config.loss = parse_loss_json(j.at("loss"));
  config.function_class = parse_function_class_json(j.at("class"));
  config.family = parse_weight_family_json(j.at("family"));
  if (j.contains("oracle")) {
    // The oracle choice can be stated explicitly; it must agree with the
    // class kind, which already determines the shipped implementation.
    const std::string oracle = j.at("oracle").get<std::string>();
    const FunctionClassKind kind = config.function_class.kind;
    const bool consistent =
        (oracle == "finite" && kind == FunctionClassKind::finite) ||
        (oracle == "interval_mean" && kind == FunctionClassKind::interval_constant) ||
        (oracle == "linear_l2" && kind == FunctionClassKind::linear_l2_ball);
    if (!consistent)
      throw std::invalid_argument("solve config: oracle '" + oracle +
                                  "' does not match the class kind");
  }
  return config;
}

RatesConfig parse_rates_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  check_keys(j,
             {"scenario", "method", "metric", "n_grid", "replicates", "seed", "rounds", "eta",
              "scaling", "jobs", "target_slope_interval"},
             "rates config");
  RatesConfig config;

  const json& sc = j.at("scenario");
  const std::string kind = sc.at("kind").get<std::string>();
  if (kind == "prop1") {
    check_keys(sc, {"kind"}, "scenario");
    config.scenario = make_prop1_scenario();
  } else if (kind == "dro-slow") {
    check_keys(sc, {"kind", "mu1", "mu2", "C"}, "scenario");
    const double mu1 = sc.contains("mu1") ? sc.at("mu1").get<double>() : 1.5;
    const double mu2 = sc.contains("mu2") ? sc.at("mu2").get<double>() : 0.5;
    const double C = sc.contains("C") ? sc.at("C").get<double>() : 2.0;
    config.scenario = make_dro_slow_scenario(mu1, mu2, C);
  } else if (kind == "linreg-covshift") {
    check_keys(sc, {"kind", "dimension"}, "scenario");
    const std::size_t d = sc.contains("dimension") ? sc.at("dimension").get<std::size_t>() : 5;
    config.scenario = make_linreg_covshift_scenario(LinregCovshiftSpec::default_spec(d));
  } else if (kind == "contextual-bandit") {
    check_keys(sc, {"kind"}, "scenario");
    config.scenario = make_contextual_bandit_scenario(ContextualBanditSpec::default_spec());
  } else {
    throw std::invalid_argument("scenario: unknown kind '" + kind + "'");
  }

  const std::string method = j.at("method").get<std::string>();
  if (method == "mro")
    config.method = SweepMethod::mro;
  else if (method == "smro")
    config.method = SweepMethod::smro;
  else if (method == "dro")
    config.method = SweepMethod::dro;
  else if (method == "erm")
    config.method = SweepMethod::erm_p0;
  else
    throw std::invalid_argument("rates config: unknown method '" + method + "'");

  const std::string metric = j.at("metric").get<std::string>();
  if (metric == "worst_case_regret_excess")
    config.metric = SweepMetric::worst_case_regret_excess;
  else if (metric == "worst_case_risk_excess")
    config.metric = SweepMetric::worst_case_risk_excess;
  else
    throw std::invalid_argument("rates config: unknown metric '" + metric + "'");

  config.sweep.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
  if (config.sweep.n_grid.size() < 4)
    throw std::invalid_argument("rates config: n_grid needs at least four points");
  if (j.contains("replicates"))
    config.sweep.replicates = j.at("replicates").get<std::size_t>();
  if (j.contains("seed")) config.sweep.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("rounds")) config.sweep.rounds = j.at("rounds").get<std::size_t>();
  if (j.contains("eta")) config.sweep.eta = j.at("eta").get<double>();
  if (j.contains("scaling")) config.sweep.smro_scaling = parse_scaling_json(j.at("scaling"));
  if (j.contains("jobs")) config.sweep.jobs = j.at("jobs").get<unsigned>();
  if (j.contains("target_slope_interval")) {
    const auto interval = j.at("target_slope_interval").get<std::vector<double>>();
    if (interval.size() != 2)
      throw std::invalid_argument("rates config: target_slope_interval needs [lo, hi]");
    config.target_interval = std::make_pair(interval[0], interval[1]);
  }
  return config;
}

BanditConfig parse_bandit_config(const std::string& json_text) {
  const json j = json::parse(json_text);
  check_keys(j, {"scenario", "n", "rounds", "eta", "seed"}, "bandit config");
  BanditConfig config;
  const json& sc = j.at("scenario");
  check_keys(sc, {"kind"}, "scenario");
  if (sc.at("kind").get<std::string>() != "contextual-bandit")
    throw std::invalid_argument("bandit config: scenario kind must be contextual-bandit");
  config.spec = ContextualBanditSpec::default_spec();
  config.n = j.at("n").get<std::size_t>();
  if (j.contains("rounds")) config.rounds = j.at("rounds").get<std::size_t>();
  if (j.contains("eta")) config.eta = j.at("eta").get<double>();
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  return config;
}

}  // namespace mrokit
