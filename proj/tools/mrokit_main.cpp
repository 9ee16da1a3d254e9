// mrokit: minimax-regret / distributionally-robust solvers over finite
// weight families, with analytic fixtures and rate-sweep experiment drivers.
//
// Commands: solve, reproduce, rates, bandit. All outputs are JSON/CSV with
// reals printed to 17 significant digits, so fixed seeds give byte-identical
// files. Exit codes: 0 ok, 2 bad config, 3 bad dataset, 4 solver failure,
// 5 self-check mismatch.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mrokit/io.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;
constexpr int kExitMismatch = 5;

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("MROKIT_LOG");
  if (env == nullptr) return LogLevel::error;
  const std::string value = env;
  if (value == "debug") return LogLevel::debug;
  if (value == "info") return LogLevel::info;
  return LogLevel::error;
}

void log_info(const std::string& message) {
  if (log_level() >= LogLevel::info) std::cerr << "[info] " << message << "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  return out;
}

int cmd_solve(const std::string& config_path, const std::string& data_path,
              const std::string& out_dir) {
  mrokit::SolveConfig config;
  try {
    config = mrokit::parse_solve_config(read_file(config_path));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::ofstream solution_out, report_out;
  try {
    solution_out = open_output(std::filesystem::path(out_dir) / "solution.json");
    report_out = open_output(std::filesystem::path(out_dir) / "report.csv");
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitConfig;
  }

  mrokit::ValidatedData data{mrokit::Dataset({mrokit::Sample{{}, 0.0}}, mrokit::Matrix(1, 1),
                                             {"w"}),
                             mrokit::WeightFamily{}, {}};
  try {
    std::ifstream in(data_path);
    if (!in) throw std::invalid_argument("cannot open " + data_path);
    mrokit::Dataset raw = mrokit::read_dataset_jsonl(in, config.family.names);
    data = mrokit::validate_dataset(raw, config.family, config.renormalize);
  } catch (const std::exception& e) {
    std::cerr << "dataset error: " << e.what() << "\n";
    return kExitData;
  }

  try {
    log_info("solving " + std::string(mrokit::objective_mode_name(config.objective.mode)) +
             " over " + std::to_string(data.dataset.size()) + " samples");
    const mrokit::GameSolution solution =
        mrokit::solve_game(data.dataset, data.family, mrokit::ErmOracle{}, config.loss,
                           config.function_class, config.objective, config.rounds, config.eta);
    const mrokit::RegretReport report = mrokit::empirical_regret_report(
        solution.iterate_hypotheses[solution.best_iterate], data.dataset, config.loss,
        solution.per_weight_baselines);
    solution_out << mrokit::solution_to_json(solution, data.family.names) << "\n";
    mrokit::write_regret_report_csv(report_out, report, data.family.names);
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}

// Golden tables for the self-checking fixtures. A mismatch beyond 1e-9
// makes the command exit nonzero, so CI catches regressions without a test
// framework.
int cmd_reproduce(const std::string& fixture, const std::string& out_dir) {
  const double tol = 1e-9;
  try {
    std::ofstream out = open_output(std::filesystem::path(out_dir) / (fixture + ".json"));
    if (fixture == "prop1") {
      const mrokit::SyntheticScenario scenario = mrokit::make_prop1_scenario();
      auto [twin, twin_family] = mrokit::exact_twin_dataset(scenario);
      const auto& cls = scenario.function_class;
      double table[2][2];
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t w = 0; w < 2; ++w)
          table[k][w] = mrokit::empirical_risk(mrokit::Hypothesis::finite(cls, k), w, twin,
                                               scenario.loss);
      const double expected[2][2] = {{0.04, 0.29}, {0.25, 0.26}};
      bool ok = true;
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t w = 0; w < 2; ++w)
          ok = ok && std::abs(table[k][w] - expected[k][w]) <= tol;

      const std::size_t mro = mrokit::population_selection_mro(scenario);
      const std::size_t dro = mrokit::population_selection_dro(scenario);
      const double mro_value =
          mrokit::population_regret_report(mrokit::Hypothesis::finite(cls, mro), scenario)
              .worst_case_regret;
      const double dro_value = mrokit::population_worst_case_risk(
          mrokit::Hypothesis::finite(cls, dro), scenario);
      ok = ok && mro == 0 && dro == 1 && std::abs(mro_value - 0.03) <= tol &&
           std::abs(dro_value - 0.26) <= tol;

      out << "{\"fixture\":\"prop1\",\"risk_table\":[["
          << mrokit::format_real(table[0][0]) << ',' << mrokit::format_real(table[0][1])
          << "],[" << mrokit::format_real(table[1][0]) << ','
          << mrokit::format_real(table[1][1]) << "]],\"mro_selection\":"
          << mrokit::format_real(cls.candidates[mro][0])
          << ",\"dro_selection\":" << mrokit::format_real(cls.candidates[dro][0])
          << ",\"mro_worst_regret\":" << mrokit::format_real(mro_value)
          << ",\"dro_worst_risk\":" << mrokit::format_real(dro_value)
          << ",\"match\":" << (ok ? "true" : "false") << "}\n";
      if (!ok) {
        std::cerr << "reproduce prop1: values deviate from the expected table\n";
        return kExitMismatch;
      }
      return 0;
    }
    if (fixture == "example2") {
      const mrokit::Example2Matrices m = mrokit::build_example2_matrix(0.01);
      const double expected_risks[3][2] = {{0.0, 1.0}, {0.5, 0.9}, {0.51, 0.4}};
      bool ok = m.mro_selection == 1 && m.dro_selection == 2;
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t w = 0; w < 2; ++w)
          ok = ok && std::abs(m.risks(k, w) - expected_risks[k][w]) <= tol;
      const double expected_regret_p2[3] = {0.6, 0.5, 0.0};
      for (std::size_t k = 0; k < 3; ++k)
        ok = ok && std::abs(m.regrets(k, 1) - expected_regret_p2[k]) <= tol;

      out << "{\"fixture\":\"example2\",\"risks\":[";
      for (std::size_t k = 0; k < 3; ++k) {
        out << (k > 0 ? "," : "") << '[' << mrokit::format_real(m.risks(k, 0)) << ','
            << mrokit::format_real(m.risks(k, 1)) << ']';
      }
      out << "],\"regrets\":[";
      for (std::size_t k = 0; k < 3; ++k) {
        out << (k > 0 ? "," : "") << '[' << mrokit::format_real(m.regrets(k, 0)) << ','
            << mrokit::format_real(m.regrets(k, 1)) << ']';
      }
      out << "],\"mro_selection\":" << m.mro_selection
          << ",\"dro_selection\":" << m.dro_selection
          << ",\"match\":" << (ok ? "true" : "false") << "}\n";
      if (!ok) {
        std::cerr << "reproduce example2: values deviate from the expected table\n";
        return kExitMismatch;
      }
      return 0;
    }
    std::cerr << "unknown fixture '" << fixture << "' (expected prop1 or example2)\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "reproduce error: " << e.what() << "\n";
    return kExitSolver;
  }
}

int cmd_rates(const std::string& config_path, const std::string& out_dir, unsigned jobs) {
  mrokit::RatesConfig config;
  try {
    config = mrokit::parse_rates_config(read_file(config_path));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (jobs != 0) config.sweep.jobs = jobs;

  const char* method = config.method == mrokit::SweepMethod::mro      ? "mro"
                       : config.method == mrokit::SweepMethod::smro   ? "smro"
                       : config.method == mrokit::SweepMethod::dro    ? "dro"
                                                                      : "erm";
  const char* metric = config.metric == mrokit::SweepMetric::worst_case_risk_excess
                           ? "worst_case_risk_excess"
                           : "worst_case_regret_excess";
  try {
    std::ofstream csv = open_output(std::filesystem::path(out_dir) / "sweep.csv");
    std::ofstream summary = open_output(std::filesystem::path(out_dir) / "summary.json");
    mrokit::RateSweepResult result;
    try {
      log_info(std::string("rate sweep: ") + config.scenario.name + " / " + method);
      result = mrokit::rate_sweep(config.scenario, config.method, config.metric, config.sweep);
    } catch (const mrokit::RateSweepFailure& failure) {
      mrokit::write_sweep_csv(csv, failure.partial);
      std::cerr << "rates error (partial results written): " << failure.what() << "\n";
      return kExitSolver;
    }
    mrokit::write_sweep_csv(csv, result);
    summary << mrokit::sweep_summary_json(result, config.scenario.name, method, metric)
            << "\n";
    std::cout << "fitted_slope=" << mrokit::format_real(result.fitted_slope);
    if (config.target_interval)
      std::cout << " target=[" << mrokit::format_real(config.target_interval->first) << ","
                << mrokit::format_real(config.target_interval->second) << "]";
    std::cout << "\n";
  } catch (const std::exception& e) {
    std::cerr << "rates error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}

int cmd_bandit(const std::string& config_path, const std::string& out_dir) {
  mrokit::BanditConfig config;
  try {
    config = mrokit::parse_bandit_config(read_file(config_path));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    std::ofstream csv = open_output(std::filesystem::path(out_dir) / "bandit_report.csv");
    std::ofstream summary = open_output(std::filesystem::path(out_dir) / "bandit_summary.json");

    const mrokit::SyntheticScenario scenario =
        mrokit::make_contextual_bandit_scenario(config.spec);
    const mrokit::ValidatedData data =
        mrokit::build_sampled(scenario, config.n, config.seed);

    // Reward regression two ways: plain ERM on the logged data, and the
    // minimax-regret game over the per-policy weight columns.
    std::vector<double> ones(data.dataset.size(), 1.0);
    mrokit::ErmRequest erm_request{&ones, &data.dataset, scenario.loss,
                                   scenario.function_class, 1e-8};
    const mrokit::Hypothesis erm_fit = mrokit::solve_erm(erm_request);

    const mrokit::GameSolution solution = mrokit::solve_game(
        data.dataset, data.family, mrokit::ErmOracle{}, scenario.loss,
        scenario.function_class, mrokit::Objective::mro(), config.rounds, config.eta);
    const mrokit::Hypothesis& mro_fit = solution.iterate_hypotheses[solution.best_iterate];

    const mrokit::RegretReport erm_report = mrokit::empirical_regret_report(
        erm_fit, data.dataset, scenario.loss, solution.per_weight_baselines);
    const mrokit::RegretReport mro_report = mrokit::empirical_regret_report(
        mro_fit, data.dataset, scenario.loss, solution.per_weight_baselines);

    csv << "policy,erm_weighted_mse,erm_regret,mro_weighted_mse,mro_regret\n";
    for (std::size_t w = 0; w < data.family.size(); ++w)
      csv << data.family.names[w] << ',' << mrokit::format_real(erm_report.per_weight_risk[w])
          << ',' << mrokit::format_real(erm_report.per_weight_regret_clamped[w]) << ','
          << mrokit::format_real(mro_report.per_weight_risk[w]) << ','
          << mrokit::format_real(mro_report.per_weight_regret_clamped[w]) << '\n';

    const bool dominance = mro_report.worst_case_regret <=
                           erm_report.worst_case_regret + solution.gap_certificate + 1e-12;
    summary << "{\"n\":" << config.n << ",\"rounds\":" << config.rounds
            << ",\"erm_worst_regret\":" << mrokit::format_real(erm_report.worst_case_regret)
            << ",\"mro_worst_regret\":" << mrokit::format_real(mro_report.worst_case_regret)
            << ",\"gap_certificate\":" << mrokit::format_real(solution.gap_certificate)
            << ",\"mro_within_certificate\":" << (dominance ? "true" : "false") << "}\n";
    std::cout << "mro_worst_regret=" << mrokit::format_real(mro_report.worst_case_regret)
              << " erm_worst_regret=" << mrokit::format_real(erm_report.worst_case_regret)
              << "\n";
  } catch (const std::exception& e) {
    std::cerr << "bandit error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimax regret optimization toolkit"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_dir = ".", fixture;
  unsigned jobs = 0;
  std::uint64_t seed = 0;

  CLI::App* solve = app.add_subcommand("solve", "solve one dataset under a run config");
  solve->add_option("--config", config_path, "run config JSON")->required();
  solve->add_option("--data", data_path, "dataset JSON Lines")->required();
  solve->add_option("--out", out_dir, "output directory");
  solve->add_option("--seed", seed, "unused for solve; accepted for uniformity");

  CLI::App* reproduce = app.add_subcommand("reproduce", "self-checking analytic fixtures");
  reproduce->add_option("fixture", fixture, "prop1 or example2")->required();
  reproduce->add_option("--out", out_dir, "output directory");

  CLI::App* rates = app.add_subcommand("rates", "convergence-rate sweep");
  rates->add_option("--config", config_path, "sweep config JSON")->required();
  rates->add_option("--out", out_dir, "output directory");
  rates->add_option("--jobs", jobs, "worker threads (0: all cores)");

  CLI::App* bandit = app.add_subcommand("bandit", "offline bandit reward-regression report");
  bandit->add_option("--config", config_path, "bandit config JSON")->required();
  bandit->add_option("--out", out_dir, "output directory");
  bandit->add_option("--jobs", jobs, "worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (solve->parsed()) return cmd_solve(config_path, data_path, out_dir);
  if (reproduce->parsed()) return cmd_reproduce(fixture, out_dir);
  if (rates->parsed()) return cmd_rates(config_path, out_dir, jobs);
  if (bandit->parsed()) return cmd_bandit(config_path, out_dir);
  return kExitConfig;
}
