#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "mrokit/io.hpp"
#include "mrokit/scenarios.hpp"

using namespace mrokit;
namespace fs = std::filesystem;

namespace {

const fs::path kTmp = MROKIT_TEST_TMP;

int run_cli(const std::string& args) {
  fs::create_directories(kTmp);
  const std::string command = std::string(MROKIT_CLI_PATH) + " " + args + " > " +
                              (kTmp / "stdout.txt").string() + " 2> " +
                              (kTmp / "stderr.txt").string();
  const int status = std::system(command.c_str());
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << text;
}

// Exact-twin dataset and matching config files for the two-distribution
// mean-estimation fixture.
void write_twin_fixture(const fs::path& dir, const std::string& objective) {
  const auto [twin, twin_family] = exact_twin_dataset(make_prop1_scenario());
  std::ostringstream data;
  write_dataset_jsonl(data, twin);
  write_file(dir / "data.jsonl", data.str());
  const std::string config = std::string("{\"objective\":\"") + objective +
                             "\",\"T\":2000,"
                             "\"loss\":{\"kind\":\"squared\",\"bound\":1.0,\"lipschitz\":2.0},"
                             "\"class\":{\"kind\":\"finite\",\"candidates\":[[0.3],[0.6]]},"
                             "\"family\":" + weight_family_to_json(twin_family) + "}";
  write_file(dir / "config.json", config);
}

}  // namespace

TEST_CASE("cli solve: minimax regret on the exact twin") {
  const fs::path dir = kTmp / "solve_mro";
  write_twin_fixture(dir, "mro");
  const int code = run_cli("solve --config " + (dir / "config.json").string() + " --data " +
                           (dir / "data.jsonl").string() + " --out " + (dir / "out").string());
  CHECK(code == 0);

  const auto solution = nlohmann::json::parse(slurp(dir / "out" / "solution.json"));
  CHECK(solution.at("best_iterate").at("parameters")[0].get<double>() == 0.3);
  CHECK(solution.at("objective").get<std::string>() == "mro");

  // Worst-case empirical regret 0.03 appears in the report CSV.
  const std::string report = slurp(dir / "out" / "report.csv");
  std::istringstream lines(report);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "weight_name,risk,baseline,regret");
  double worst = 0.0;
  while (std::getline(lines, line)) {
    const auto last_comma = line.rfind(',');
    worst = std::max(worst, std::stod(line.substr(last_comma + 1)));
  }
  CHECK(worst == doctest::Approx(0.03).epsilon(1e-9));
}

TEST_CASE("cli solve: worst-case risk on the exact twin") {
  const fs::path dir = kTmp / "solve_dro";
  write_twin_fixture(dir, "dro");
  const int code = run_cli("solve --config " + (dir / "config.json").string() + " --data " +
                           (dir / "data.jsonl").string() + " --out " + (dir / "out").string());
  CHECK(code == 0);
  const auto solution = nlohmann::json::parse(slurp(dir / "out" / "solution.json"));
  CHECK(solution.at("best_iterate").at("parameters")[0].get<double>() == 0.6);
  CHECK(solution.at("best_iterate").at("payoff").get<double>() ==
        doctest::Approx(0.26).epsilon(1e-9));
}

TEST_CASE("cli solve: repeated runs are byte-identical") {
  const fs::path dir = kTmp / "solve_repeat";
  write_twin_fixture(dir, "mro");
  const std::string base = "solve --config " + (dir / "config.json").string() + " --data " +
                           (dir / "data.jsonl").string() + " --out ";
  CHECK(run_cli(base + (dir / "out1").string()) == 0);
  CHECK(run_cli(base + (dir / "out2").string()) == 0);
  CHECK(slurp(dir / "out1" / "solution.json") == slurp(dir / "out2" / "solution.json"));
  CHECK(slurp(dir / "out1" / "report.csv") == slurp(dir / "out2" / "report.csv"));
}

TEST_CASE("cli exit codes per error class") {
  const fs::path dir = kTmp / "errors";
  write_twin_fixture(dir, "mro");

  write_file(dir / "broken.json", "{\"objective\":");
  CHECK(run_cli("solve --config " + (dir / "broken.json").string() + " --data " +
                (dir / "data.jsonl").string() + " --out " + (dir / "out").string()) == 2);

  write_file(dir / "unknown_key.json",
             "{\"objective\":\"mro\",\"typo\":1,"
             "\"loss\":{\"kind\":\"squared\",\"bound\":1.0,\"lipschitz\":2.0},"
             "\"class\":{\"kind\":\"finite\",\"candidates\":[[0.3]]},"
             "\"family\":{\"names\":[\"w\"],\"per_weight_bound\":[1.0],\"family_bound\":1.0}}");
  CHECK(run_cli("solve --config " + (dir / "unknown_key.json").string() + " --data " +
                (dir / "data.jsonl").string() + " --out " + (dir / "out").string()) == 2);

  write_file(dir / "bad_data.jsonl", "{\"features\":[],\"label\":0.1,\"weights\":{\"p1\":-1.0,"
                                     "\"p2\":0.0}}\n");
  CHECK(run_cli("solve --config " + (dir / "config.json").string() + " --data " +
                (dir / "bad_data.jsonl").string() + " --out " + (dir / "out").string()) == 3);

  CHECK(run_cli("solve --config " + (dir / "config.json").string() + " --data " +
                (dir / "missing.jsonl").string() + " --out " + (dir / "out").string()) == 3);

  // Sweep config with a single grid point is rejected as invalid.
  write_file(dir / "rates_short.json",
             "{\"scenario\":{\"kind\":\"dro-slow\"},\"method\":\"dro\","
             "\"metric\":\"worst_case_risk_excess\",\"n_grid\":[100]}");
  CHECK(run_cli("rates --config " + (dir / "rates_short.json").string() + " --out " +
                (dir / "out").string()) == 2);

  // Bandit config missing a required field.
  write_file(dir / "bandit_missing.json", "{\"scenario\":{\"kind\":\"contextual-bandit\"}}");
  CHECK(run_cli("bandit --config " + (dir / "bandit_missing.json").string() + " --out " +
                (dir / "out").string()) == 2);
}

TEST_CASE("cli reproduce fixtures self-check") {
  CHECK(run_cli("reproduce prop1 --out " + (kTmp / "repro").string()) == 0);
  const auto prop1 = nlohmann::json::parse(slurp(kTmp / "repro" / "prop1.json"));
  CHECK(prop1.at("match").get<bool>());
  CHECK(prop1.at("mro_selection").get<double>() == 0.3);
  CHECK(prop1.at("dro_selection").get<double>() == 0.6);

  CHECK(run_cli("reproduce example2 --out " + (kTmp / "repro").string()) == 0);
  const auto example2 = nlohmann::json::parse(slurp(kTmp / "repro" / "example2.json"));
  CHECK(example2.at("match").get<bool>());
  CHECK(example2.at("mro_selection").get<int>() == 1);
  CHECK(example2.at("dro_selection").get<int>() == 2);

  CHECK(run_cli("reproduce nonsense --out " + (kTmp / "repro").string()) == 2);
}

TEST_CASE("cli rates: small sweep writes csv and summary") {
  const fs::path dir = kTmp / "rates";
  write_file(dir / "config.json",
             "{\"scenario\":{\"kind\":\"dro-slow\"},\"method\":\"dro\","
             "\"metric\":\"worst_case_risk_excess\",\"n_grid\":[64,128,256,512],"
             "\"replicates\":4,\"seed\":3,\"rounds\":40,"
             "\"target_slope_interval\":[-0.65,-0.35]}");
  CHECK(run_cli("rates --config " + (dir / "config.json").string() + " --out " +
                (dir / "out").string() + " --jobs 2") == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary.at("fitted_slope").is_number());
  const std::string csv = slurp(dir / "out" / "sweep.csv");
  CHECK(csv.rfind("n,replicate,metric\n", 0) == 0);
  const std::string echoed = slurp(kTmp / "stdout.txt");
  CHECK(echoed.find("fitted_slope=") != std::string::npos);
  CHECK(echoed.find("target=[-0.65") != std::string::npos);
}

TEST_CASE("cli bandit: weighted regression report") {
  const fs::path dir = kTmp / "bandit";
  write_file(dir / "config.json",
             "{\"scenario\":{\"kind\":\"contextual-bandit\"},\"n\":2000,\"rounds\":150,"
             "\"seed\":5}");
  CHECK(run_cli("bandit --config " + (dir / "config.json").string() + " --out " +
                (dir / "out").string()) == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "bandit_summary.json"));
  CHECK(summary.at("mro_within_certificate").get<bool>());
  CHECK(summary.at("mro_worst_regret").get<double>() <=
        summary.at("erm_worst_regret").get<double>() +
            summary.at("gap_certificate").get<double>() + 1e-12);
  const std::string csv = slurp(dir / "out" / "bandit_report.csv");
  CHECK(csv.rfind("policy,", 0) == 0);
  CHECK(csv.find("greedy") != std::string::npos);
}
