#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "qpufsim/cli.hpp"
#include "qpufsim/errors.hpp"
#include "qpufsim/matrix_io.hpp"
#include "qpufsim/sampling.hpp"
#include "test_util.hpp"

using namespace qpufsim;
using doctest::Approx;
using nlohmann::json;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/qpufsim_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
  void write(const std::string& content) const {
    std::ofstream out(path);
    out << content;
  }
};

}  // namespace

TEST_CASE("parse fills defaults and validates") {
  const Scenario sc = parse_scenario({"protocol-lr", "--dim", "16", "--rounds", "32", "--seed", "7"});
  CHECK(sc.command == "protocol-lr");
  CHECK(sc.seed == 7);
  CHECK(sc.params["delta"].get<double>() == 0.5);
  CHECK(sc.params["delta-er"].get<double>() == 6.0);  // Hoeffding default, frozen
  CHECK(sc.params["prover"].get<std::string>() == "honest");

  CHECK_THROWS_WITH_AS(parse_scenario({"protocol-lr", "--rounds", "31"}),
                       doctest::Contains("even"), ConfigError);
  CHECK_THROWS_AS(parse_scenario({"frobnicate"}), ConfigError);
  CHECK_THROWS_AS(parse_scenario({"game", "--no-such-flag", "1"}), ConfigError);
  CHECK_THROWS_AS(parse_scenario({}), ConfigError);
  CHECK_THROWS_AS(parse_scenario({"game", "--adversary", "psychic"}), ConfigError);
}

TEST_CASE("config file merging: flags win and unknown keys are named") {
  TempFile cfg("merge.json");
  cfg.write(R"({"dim": 8, "trials": 300})");

  const Scenario sc = parse_scenario({"game", "--config", cfg.path, "--dim", "4"});
  CHECK(sc.params["dim"].get<int>() == 4);        // flag wins
  CHECK(sc.params["trials"].get<int>() == 300);   // file fills the rest
  REQUIRE(sc.warnings.size() == 1);
  CHECK(sc.warnings[0].find("'dim'") != std::string::npos);

  TempFile bad("bad_key.json");
  bad.write(R"({"dimension": 8})");
  CHECK_THROWS_WITH_AS(parse_scenario({"game", "--config", bad.path}),
                       doctest::Contains("dimension"), ConfigError);

  TempFile garbage("garbage.json");
  garbage.write("not json at all {");
  CHECK_THROWS_AS(parse_scenario({"game", "--config", garbage.path}), ConfigError);
  CHECK_THROWS_AS(parse_scenario({"game", "--config", "/nonexistent/x.json"}), ConfigError);
}

TEST_CASE("swap-demo closed forms through the cli") {
  const Scenario sc = parse_scenario({"swap-demo", "--dim", "2"});
  const Report r = execute(sc);
  CHECK(r.metrics.at("swap.p_accept").value == 0.5);  // orthogonal pair, exact
  CHECK(r.metrics.at("gswap.p_accept").value == Approx(0.25).epsilon(1e-12));
  CHECK(r.metrics.at("swap.p_accept_circuit").value == Approx(0.5).epsilon(1e-10));

  const Scenario ident = parse_scenario({"swap-demo", "--dim", "2", "--pair", "identical"});
  CHECK(execute(ident).metrics.at("swap.p_accept").value == 1.0);

  const Scenario sampled =
      parse_scenario({"swap-demo", "--dim", "2", "--trials", "2000", "--seed", "9"});
  const Report rs = execute(sampled);
  CHECK(rs.metrics.at("swap.sampled_accept_rate").std_err.has_value());
}

TEST_CASE("reports render in all three formats") {
  const Scenario sc = parse_scenario({"swap-demo", "--dim", "2", "--output", "csv"});
  const Report r = execute(sc);
  const std::string csv = r.to_csv();
  CHECK(csv.find("swap.p_accept") != std::string::npos);
  CHECK(csv.find("\nswap-demo,0,0") != std::string::npos);

  const std::string human = r.to_human();
  CHECK(human.find("command: swap-demo") != std::string::npos);

  const json j = r.to_json();
  CHECK(j["command"] == "swap-demo");
  CHECK(j["metrics"]["swap.p_accept"]["value"] == 0.5);
  CHECK(j.contains("wall_time_seconds"));
  CHECK(j["version"].get<std::string>() == std::string("0.1.0"));
}

TEST_CASE("metrics are identical across runs and worker counts") {
  auto run = [](const char* threads) {
    const Scenario sc = parse_scenario({"game", "--dim", "4", "--trials", "400", "--seed", "11",
                                        "--threads", threads});
    return execute(sc).to_json()["metrics"].dump();
  };
  const std::string one = run("1");
  CHECK(one == run("1"));
  CHECK(one == run("4"));
  CHECK(one == run("3"));

  auto run_lr = [](const char* threads) {
    const Scenario sc = parse_scenario({"protocol-lr", "--dim", "4", "--rounds", "8", "--trials",
                                        "300", "--seed", "13", "--threads", threads});
    return execute(sc).to_json()["metrics"].dump();
  };
  CHECK(run_lr("1") == run_lr("4"));
}

TEST_CASE("unitary files round-trip and feed fixed devices") {
  Rng rng(RngStream{111, 0});
  const UnitaryOp u = haar_unitary(4, rng);
  TempFile file("unitary.txt");
  save_unitary(file.path, u);
  const UnitaryOp loaded = load_unitary(file.path);
  CHECK((loaded.entries() - u.entries()).cwiseAbs().maxCoeff() == 0.0);  // lossless %.17g

  TempFile junk("junk.txt");
  junk.write("nonsense\n");
  CHECK_THROWS_AS(load_unitary(junk.path), ConfigError);

  const Scenario sc = parse_scenario({"game", "--dim", "4", "--trials", "150", "--seed", "3",
                                      "--device-family", "fixed", "--device-matrix", file.path});
  CHECK_NOTHROW(execute(sc));

  // a fixed identity device echoes challenges back
  const Scenario id_sc = parse_scenario({"uniqueness", "--dim", "4", "--devices", "2",
                                         "--device-family", "fixed"});
  const Report id_r = execute(id_sc);
  CHECK(id_r.metrics.at("uniqueness.min_pairwise_distance").value == Approx(0.0).epsilon(1e-9));
  CHECK(id_r.metrics.at("uniqueness.fraction_ge_delta_u").value == 0.0);
}

TEST_CASE("export-device writes a loadable matrix") {
  TempFile out("exported.txt");
  const Scenario sc = parse_scenario({"game", "--dim", "4", "--trials", "150", "--seed", "21",
                                      "--export-device", out.path});
  execute(sc);
  const UnitaryOp u = load_unitary(out.path);
  CHECK(u.dim() == 4);
}

TEST_CASE("exit codes follow the documented table") {
  auto run_args = [](std::initializer_list<const char*> argv_tail) {
    std::vector<const char*> argv{"qpufsim"};
    argv.insert(argv.end(), argv_tail);
    return run_cli(static_cast<int>(argv.size()), argv.data());
  };

  CHECK(run_args({"--help"}) == 0);
  CHECK(run_args({"game", "--help"}) == 0);
  CHECK(run_args({"protocol-lr", "--rounds", "31"}) == 2);
  CHECK(run_args({"definitely-not-a-command"}) == 2);
  // maxunique with an impossible distance bar at d=2 exhausts its budget
  CHECK(run_args({"spectral", "--family", "maxunique", "--dim", "2", "--samples", "40",
                  "--epsilon", "1e-9", "--max-attempts", "50"}) == 5);
  CHECK(run_args({"swap-demo", "--dim", "2", "--seed", "1"}) == 0);
}

TEST_CASE("uniqueness command reports haar spreading") {
  const Scenario sc = parse_scenario(
      {"uniqueness", "--dim", "16", "--devices", "6", "--delta-u", "1.9", "--seed", "2"});
  const Report r = execute(sc);
  CHECK(r.metrics.at("uniqueness.fraction_ge_delta_u").value >= 0.9);
  CHECK(r.metrics.at("uniqueness.mean_pairwise_distance").value > 1.9);
  CHECK(r.metrics.at("uniqueness.n_devices").value == 6.0);
}

TEST_CASE("verbose reports carry per-trial detail") {
  const Scenario sc = parse_scenario({"protocol-lr", "--dim", "4", "--rounds", "8", "--trials",
                                      "150", "--seed", "5", "--verbose"});
  const Report r = execute(sc);
  const json j = r.to_json();
  REQUIRE(j.contains("per_trial"));
  CHECK(j["per_trial"].size() == 10);
  CHECK(j["per_trial"][0].size() == 8);  // one record per round
  CHECK(j["per_trial"][0][0].contains("b"));
  CHECK(j["per_trial"][0][0].contains("s"));
}
