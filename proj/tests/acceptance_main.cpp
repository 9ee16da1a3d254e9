// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line with its runtime. Exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "brute_force.hpp"
#include "mrokit/io.hpp"
#include "mrokit/scenarios.hpp"
#include "mrokit/solver.hpp"

using namespace mrokit;
using testing::bounded_weight_lp_max;
using testing::random_matrix_game;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& message) {
    if (!condition && ok) {
      ok = false;
      detail = message;
    }
  }
};

std::string real(double v) { return format_real(v); }

double median_of(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  std::nth_element(values.begin(), values.begin() + mid - 1, values.begin() + mid);
  return 0.5 * (values[mid - 1] + upper);
}

// --------------------------------------------------------------------------
// 1. Exact-twin reproduction of the two-distribution risk table.

Outcome criterion_1() {
  Outcome out;
  const SyntheticScenario scenario = make_prop1_scenario();
  const auto [twin, twin_family] = exact_twin_dataset(scenario);
  const FunctionClass& cls = scenario.function_class;

  const double expected[2][2] = {{0.04, 0.29}, {0.25, 0.26}};
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t w = 0; w < 2; ++w) {
      const double risk = empirical_risk(Hypothesis::finite(cls, k), w, twin, scenario.loss);
      out.require(std::abs(risk - expected[k][w]) <= 1e-9,
                  "risk table entry (" + std::to_string(k) + "," + std::to_string(w) +
                      ") = " + real(risk));
    }

  const GameSolution mro = solve_game(twin, twin_family, ErmOracle{}, scenario.loss, cls,
                                      Objective::mro(), 2000);
  const Hypothesis& mro_pick = mro.iterate_hypotheses[mro.best_iterate];
  out.require(mro_pick.parameters()[0] == 0.3, "mro selected " +
                                                   real(mro_pick.parameters()[0]));
  const RegretReport report =
      empirical_regret_report(mro_pick, twin, scenario.loss, mro.per_weight_baselines);
  out.require(std::abs(report.worst_case_regret - 0.03) <= 1e-9,
              "mro worst regret " + real(report.worst_case_regret));

  const GameSolution dro = solve_game(twin, twin_family, ErmOracle{}, scenario.loss, cls,
                                      Objective::dro(), 2000);
  const Hypothesis& dro_pick = dro.iterate_hypotheses[dro.best_iterate];
  out.require(dro_pick.parameters()[0] == 0.6, "dro selected " +
                                                   real(dro_pick.parameters()[0]));
  const std::vector<double> risks = per_weight_empirical_risks(dro_pick, twin, scenario.loss);
  out.require(std::abs(std::max(risks[0], risks[1]) - 0.26) <= 1e-9,
              "dro objective " + real(std::max(risks[0], risks[1])));
  return out;
}

// --------------------------------------------------------------------------
// 2. Sampled selection consistency at n = 20000.

Outcome criterion_2() {
  Outcome out;
  const std::size_t replicates = 50;
  int mro_hits = 0, dro_hits = 0;
  for (std::size_t rep = 0; rep < replicates; ++rep) {
    const Prop1Fixture fixture = build_prop1(10000, derive_seed(2024, rep, 0));
    const SyntheticScenario& scenario = fixture.scenario;
    const GameSolution mro =
        solve_game(fixture.sampled.dataset, fixture.sampled.family, ErmOracle{}, scenario.loss,
                   scenario.function_class, Objective::mro(), 2000);
    if (mro.iterate_hypotheses[mro.best_iterate].parameters()[0] == 0.3) ++mro_hits;
    const GameSolution dro =
        solve_game(fixture.sampled.dataset, fixture.sampled.family, ErmOracle{}, scenario.loss,
                   scenario.function_class, Objective::dro(), 2000);
    if (dro.iterate_hypotheses[dro.best_iterate].parameters()[0] == 0.6) ++dro_hits;
  }
  out.require(mro_hits >= 48, "mro selection rate " + std::to_string(mro_hits) + "/50");
  out.require(dro_hits >= 48, "dro selection rate " + std::to_string(dro_hits) + "/50");
  out.detail = "mro " + std::to_string(mro_hits) + "/50, dro " + std::to_string(dro_hits) +
               "/50";
  return out;
}

// --------------------------------------------------------------------------
// 3. Heterogeneous-regret table selections.

Outcome criterion_3() {
  Outcome out;
  const Example2Matrices m = build_example2_matrix(0.01);
  out.require(m.mro_selection == 1, "mro selected f" + std::to_string(m.mro_selection + 1));
  out.require(m.dro_selection == 2, "dro selected f" + std::to_string(m.dro_selection + 1));
  const double expected_risks[3][2] = {{0.0, 1.0}, {0.5, 0.9}, {0.51, 0.4}};
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t w = 0; w < 2; ++w)
      out.require(std::abs(m.risks(k, w) - expected_risks[k][w]) <= 1e-12, "risk table");
  return out;
}

// --------------------------------------------------------------------------
// 4. No-regret gap bound and agreement with the exact game value.

Outcome criterion_4() {
  Outcome out;
  std::mt19937_64 rng(4);
  int checked = 0;
  for (int instance = 0; instance < 200; ++instance) {
    const auto inst = random_matrix_game(rng, 8, 8);
    const double B = inst.family.family_bound * inst.loss.bound;
    const std::size_t W = inst.family.size();

    Matrix regret(inst.risk_matrix.size(), W);
    for (std::size_t w = 0; w < W; ++w) {
      double col_min = inst.risk_matrix[0][w];
      for (const auto& row : inst.risk_matrix) col_min = std::min(col_min, row[w]);
      for (std::size_t k = 0; k < inst.risk_matrix.size(); ++k)
        regret(k, w) = inst.risk_matrix[k][w] - col_min;
    }
    const double exact = mixed_game_value(regret).value;

    for (const std::size_t T : {std::size_t(100), std::size_t(1000)}) {
      const GameSolution solution = solve_game(inst.data, inst.family, ErmOracle{}, inst.loss,
                                               inst.function_class, Objective::mro(), T);
      const double bound = 2.0 * B *
                           std::sqrt(std::log(static_cast<double>(W)) /
                                     static_cast<double>(T));
      out.require(solution.gap_certificate <= bound,
                  "gap " + real(solution.gap_certificate) + " > bound " + real(bound) +
                      " on instance " + std::to_string(instance));
      out.require(std::abs(solution.mixture_value - exact) <= bound,
                  "mixture " + real(solution.mixture_value) + " vs exact " + real(exact) +
                      " on instance " + std::to_string(instance));
      ++checked;
    }
  }
  out.detail = std::to_string(checked) + " solves within bound";
  return out;
}

// --------------------------------------------------------------------------
// 5. Bounded-family closed form equals the vertex-enumeration LP.

Outcome criterion_5() {
  Outcome out;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double bounds[] = {1.0, 1.5, 2.0, 4.0};
  for (int instance = 0; instance < 100; ++instance) {
    const std::size_t n = 2 + rng() % 11;
    std::vector<double> labels(n);
    for (double& y : labels) y = unif(rng);
    std::vector<Sample> samples;
    for (double y : labels) samples.push_back(Sample{{}, y, std::nullopt});
    const Dataset data(samples, Matrix(n, 1, 1.0), {"w0"});

    std::vector<double> candidates(1 + rng() % 5);
    for (double& c : candidates) c = unif(rng);
    const FunctionClass rivals = FunctionClass::finite_constants(candidates);
    const double f = unif(rng);
    const Hypothesis h = Hypothesis::constant(FunctionClass::interval(1.0), f);
    const double B = bounds[instance % 4];

    const double closed =
        worst_case_regret_bounded_family(h, data, LossSpec::squared(), rivals, B);
    double brute = -std::numeric_limits<double>::infinity();
    for (double c : candidates) {
      std::vector<double> d(n);
      for (std::size_t i = 0; i < n; ++i)
        d[i] = (f - labels[i]) * (f - labels[i]) - (c - labels[i]) * (c - labels[i]);
      brute = std::max(brute, bounded_weight_lp_max(d, B));
    }
    out.require(std::abs(closed - brute) <= 1e-9,
                "closed " + real(closed) + " vs lp " + real(brute) + " on instance " +
                    std::to_string(instance));
  }
  return out;
}

// --------------------------------------------------------------------------
// 6/7. Rate sweeps on the two-component location construction.

Outcome sweep_criterion(SweepMethod method, SweepMetric metric, double mu1, double mu2,
                        double lo, double hi) {
  Outcome out;
  const SyntheticScenario scenario = make_dro_slow_scenario(mu1, mu2, 2.0);
  RateSweepConfig config;
  config.n_grid = {256, 512, 1024, 2048, 4096, 8192, 16384};
  config.replicates = 100;
  config.seed = 67;
  config.rounds = 300;
  const RateSweepResult result = rate_sweep(scenario, method, metric, config);
  out.require(result.fitted_slope >= lo && result.fitted_slope <= hi,
              "slope " + real(result.fitted_slope) + " outside [" + real(lo) + ", " +
                  real(hi) + "]");
  out.detail = "slope " + real(result.fitted_slope);
  return out;
}

Outcome criterion_6() {
  return sweep_criterion(SweepMethod::dro, SweepMetric::worst_case_risk_excess, 1.5, 0.5,
                         -0.65, -0.35);
}

// Aligned variant (equal means): the shared minimizer regime where the
// squared-loss regret concentrates at the fast rate.
Outcome criterion_7() {
  return sweep_criterion(SweepMethod::mro, SweepMetric::worst_case_regret_excess, 1.0, 1.0,
                         -1.25, -0.75);
}

// --------------------------------------------------------------------------
// 8. Squared-distance lower bound on regret for interval classes.

Outcome criterion_8() {
  Outcome out;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t atoms = 2 + rng() % 6;
    std::vector<double> values(atoms), probs(atoms);
    double total = 0.0;
    for (std::size_t a = 0; a < atoms; ++a) {
      values[a] = -2.0 + 4.0 * unif(rng);
      probs[a] = 0.05 + unif(rng);
      total += probs[a];
    }
    for (double& p : probs) p /= total;
    const double C = 0.2 + 1.3 * unif(rng);

    SyntheticScenario scenario;
    scenario.name = "discrete";
    for (double v : values) scenario.atoms.push_back(Sample{{}, v, std::nullopt});
    scenario.atom_probs = probs;
    scenario.atom_weights = Matrix(atoms, 1, 1.0);
    scenario.family = WeightFamily{{"w0"}, {1.0}, 1.0};
    scenario.function_class = FunctionClass::interval(C);
    scenario.loss = LossSpec::squared(16.0);

    double mean = 0.0;
    for (std::size_t a = 0; a < atoms; ++a) mean += probs[a] * values[a];
    const double f_p = std::clamp(mean, -C, C);
    const double f = -C + 2.0 * C * unif(rng);

    const RegretReport report =
        population_regret_report(Hypothesis::constant(scenario.function_class, f), scenario);
    out.require((f - f_p) * (f - f_p) <= report.worst_case_regret + 1e-10,
                "violation at replicate " + std::to_string(rep));
  }
  return out;
}

// --------------------------------------------------------------------------
// 9. Covariate-shift regression: scaling removes the heavy-ratio penalty.

Outcome criterion_9() {
  Outcome out;
  const LinregCovshiftSpec spec = LinregCovshiftSpec::default_spec(5);
  const SyntheticScenario scenario = make_linreg_covshift_scenario(spec);
  const std::vector<double> sigma = covariate_second_moment_diag(spec);
  const std::vector<std::size_t> n_grid = {250, 1000, 4000};
  const std::size_t replicates = 50;
  const std::size_t rounds = 300;
  const double eta = 0.1;

  std::vector<std::vector<double>> ols_err(3), smro_err(3), mro_err(3);
  std::vector<std::string> failures;
  const auto run_task = [&](std::size_t ni, std::size_t rep) {
    const std::size_t n = n_grid[ni];
    const ValidatedData data =
        build_sampled(scenario, n, derive_seed(909, ni, rep));
    ols_err[ni][rep] = sigma_weighted_sq_error(ordinary_least_squares(data.dataset),
                                               spec.beta_star, sigma);
    const GameSolution smro =
        solve_game(data.dataset, data.family, ErmOracle{}, scenario.loss,
                   scenario.function_class, Objective::smro(ScalingRule::fast()), rounds, eta);
    smro_err[ni][rep] = sigma_weighted_sq_error(
        smro.iterate_hypotheses[smro.best_iterate].parameters(), spec.beta_star, sigma);
    const GameSolution mro =
        solve_game(data.dataset, data.family, ErmOracle{}, scenario.loss,
                   scenario.function_class, Objective::mro(), rounds, eta);
    mro_err[ni][rep] = sigma_weighted_sq_error(
        mro.iterate_hypotheses[mro.best_iterate].parameters(), spec.beta_star, sigma);
  };

  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    ols_err[ni].resize(replicates);
    smro_err[ni].resize(replicates);
    mro_err[ni].resize(replicates);
  }
  std::vector<std::thread> pool;
  const unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  const std::size_t total = n_grid.size() * replicates;
  for (unsigned j = 0; j < jobs; ++j)
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t idx = next.fetch_add(1);
        if (idx >= total) return;
        run_task(idx / replicates, idx % replicates);
      }
    });
  for (auto& t : pool) t.join();

  std::string detail;
  for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
    const double ols = median_of(ols_err[ni]);
    const double smro = median_of(smro_err[ni]);
    out.require(smro <= 10.0 * ols, "n=" + std::to_string(n_grid[ni]) + ": smro " +
                                        real(smro) + " > 10x ols " + real(ols));
    detail += "n=" + std::to_string(n_grid[ni]) + " ols=" + real(ols) +
              " smro=" + real(smro) + " mro=" + real(median_of(mro_err[ni])) + "; ";
  }
  const double mro_small = median_of(mro_err[0]);
  const double smro_small = median_of(smro_err[0]);
  out.require(mro_small > smro_small, "mro " + real(mro_small) + " not above smro " +
                                          real(smro_small) + " at n=250");
  out.detail = detail;
  return out;
}

// --------------------------------------------------------------------------
// 10. Scaled-game invariance under a common rescaling of c and eta.

Outcome criterion_10() {
  Outcome out;
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double kappas[] = {0.5, 2.0, 8.0};
  for (int instance = 0; instance < 50; ++instance) {
    const auto inst = random_matrix_game(rng, 8, 8);
    std::vector<double> c(inst.family.size());
    for (double& v : c) v = 0.25 + unif(rng);
    const double eta = 0.02 + 0.2 * unif(rng);
    const double kappa = kappas[instance % 3];
    std::vector<double> scaled_c = c;
    for (double& v : scaled_c) v *= kappa;

    for (const std::size_t T : {std::size_t(10), std::size_t(60)}) {
      const GameSolution a =
          solve_game(inst.data, inst.family, ErmOracle{}, inst.loss, inst.function_class,
                     Objective::smro(ScalingRule::explicit_values(c)), T, eta);
      const GameSolution b =
          solve_game(inst.data, inst.family, ErmOracle{}, inst.loss, inst.function_class,
                     Objective::smro(ScalingRule::explicit_values(scaled_c)), T, eta * kappa);
      out.require(a.best_iterate == b.best_iterate,
                  "best iterate changed on instance " + std::to_string(instance));
      for (std::size_t w = 0; w < inst.family.size(); ++w)
        out.require(a.rho_final[w] == b.rho_final[w],
                    "rho drifted on instance " + std::to_string(instance));
      for (std::size_t t = 0; t < T; ++t)
        out.require(a.iterate_hypotheses[t].index() == b.iterate_hypotheses[t].index(),
                    "iterate path changed on instance " + std::to_string(instance));
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// 11. Byte-identical solve outputs for a fixed configuration.

Outcome criterion_11() {
  Outcome out;
  const fs::path tmp = fs::path(MROKIT_TEST_TMP) / "determinism";
  fs::create_directories(tmp);

  const auto [twin, twin_family] = exact_twin_dataset(make_prop1_scenario());
  {
    std::ofstream data(tmp / "data.jsonl");
    write_dataset_jsonl(data, twin);
    std::ofstream config(tmp / "config.json");
    config << "{\"objective\":\"mro\",\"T\":500,\"seed\":7,"
              "\"loss\":{\"kind\":\"squared\",\"bound\":1.0,\"lipschitz\":2.0},"
              "\"class\":{\"kind\":\"finite\",\"candidates\":[[0.3],[0.6]]},"
              "\"family\":"
           << weight_family_to_json(twin_family) << "}";
  }
  const auto run = [&](const std::string& out_name) {
    const std::string command = std::string(MROKIT_CLI_PATH) + " solve --config " +
                                (tmp / "config.json").string() + " --data " +
                                (tmp / "data.jsonl").string() + " --out " +
                                (tmp / out_name).string() + " > /dev/null 2>&1";
    return std::system(command.c_str());
  };
  out.require(run("a") == 0 && run("b") == 0, "cli solve failed");
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
  };
  out.require(slurp(tmp / "a" / "solution.json") == slurp(tmp / "b" / "solution.json"),
              "solution.json differs between runs");
  out.require(slurp(tmp / "a" / "report.csv") == slurp(tmp / "b" / "report.csv"),
              "report.csv differs between runs");
  out.require(!slurp(tmp / "a" / "solution.json").empty(), "empty solution output");
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "exact-twin risk table and selections", 1.0, criterion_1},
      {2, "sampled selection consistency (n=20000, 50 replicates)", 120.0, criterion_2},
      {3, "heterogeneous-regret table selections", 1.0, criterion_3},
      {4, "no-regret gap bound on 200 random games", 120.0, criterion_4},
      {5, "bounded-family closed form vs vertex LP", 30.0, criterion_5},
      {6, "location-family sweep: dro excess risk slope", 300.0, criterion_6},
      {7, "location-family sweep: mro excess regret slope", 300.0, criterion_7},
      {8, "squared-distance regret lower bound (1000 draws)", 10.0, criterion_8},
      {9, "covariate-shift regression: scaling beats raw regret", 300.0, criterion_9},
      {10, "scaled-game invariance under dyadic rescaling", 10.0, criterion_10},
      {11, "byte-identical cli outputs", 30.0, criterion_11},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > criterion.budget_seconds) {
      outcome.ok = false;
      outcome.detail = "exceeded " + format_real(criterion.budget_seconds) + " s budget";
    }
    std::cout << (outcome.ok ? "PASS" : "FAIL") << " criterion " << criterion.id << ": "
              << criterion.name << " [" << std::fixed << elapsed << " s]";
    std::cout.unsetf(std::ios_base::floatfield);
    if (!outcome.detail.empty()) std::cout << " -- " << outcome.detail;
    std::cout << "\n";
    if (!outcome.ok) ++failures;
  }
  return failures;
}
