#include <doctest.h>

#include <filesystem>

#include <nlohmann/json.hpp>

#include "cli_runner.hpp"
#include "grankin/csv.hpp"

namespace fs = std::filesystem;
using grankin::parse_csv;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / "grankin_test_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    spit(dir / "elastic.json", R"({"m":1,"m1":1,"theta1":1,"u1":[0,0,0],"e":1,"mean_free_path":1})");
    spit(dir / "inelastic.json", R"({"m":1,"m1":1,"theta1":1,"u1":[0,0,0],"e":0.9,"mean_free_path":1})");
    spit(dir / "bad.json", R"({"m":1,"e":0})");
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator()(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("small commands") {
  const Scratch s;

  SUBCASE("gap of the elastic equal-mass model") {
    const CliResult r = run_cli("gap --config " + s("elastic.json") + " 2>/dev/null");
    CHECK(r.code == 0);
    CHECK(r.out == "0.5\n");
  }

  SUBCASE("constants report") {
    const CliResult r = run_cli("constants --config " + s("inelastic.json") + " --out " + s("c.json") + " 2>/dev/null");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(s("c.json")));
    CHECK(std::abs(j["erfinv_half"]["value"].get<double>() - 0.4769) < 5e-5);
    CHECK(j["erfinv_half"]["provenance"] == "analytic-bound");
    CHECK(fs::exists(s("c.json.manifest.json")));
  }

  SUBCASE("spectrum table") {
    const CliResult r =
        run_cli("spectrum --config " + s("inelastic.json") + " --nmax 3 --lmax 3 --out " + s("t.csv") + " 2>/dev/null");
    REQUIRE(r.code == 0);
    const auto rows = parse_csv(slurp(s("t.csv")));
    REQUIRE(rows.size() == 17);
    CHECK(rows[0] == grankin::CsvRow{"n", "l", "lambda"});
    CHECK(rows[1] == grankin::CsvRow{"0", "0", "0"});
  }

  SUBCASE("manifest") {
    REQUIRE(run_cli("spectrum --out " + s("t.csv") + " --seed 9 --threads 2 --manifest " + s("m.json") + " 2>/dev/null")
                .code == 0);
    const auto m = nlohmann::json::parse(slurp(s("m.json")));
    CHECK(m["command"] == "spectrum");
    CHECK(m["seed"] == 9);
    CHECK(m["threads"] == 2);
    CHECK(m["versions"] == "grankin 1.0.0");
    CHECK(m["outputs"] == nlohmann::json::array({s("t.csv")}));
    CHECK(m["config"]["e"] == 1.0);
    CHECK(m["wall_time"].get<double>() >= 0.0);
  }

  SUBCASE("thread count: flag over environment over 1") {
    auto threads = [&](const std::string& args, const std::string& env) {
      run_cli("gap --manifest " + s("g.json") + " " + args + " >/dev/null 2>&1", env);
      return nlohmann::json::parse(slurp(s("g.json")))["threads"].get<int>();
    };
    CHECK(threads("", "GRANKIN_THREADS=") == 1);
    CHECK(threads("", "GRANKIN_THREADS=3") == 3);
    CHECK(threads("--threads 2", "GRANKIN_THREADS=3") == 2);
    CHECK(run_cli("gap >/dev/null 2>&1", "GRANKIN_THREADS=x").code == 3);
  }
}

TEST_CASE("exit codes") {
  const Scratch s;
  const std::string quiet = " --manifest " + s("m.json") + " >/dev/null 2>&1";
  CHECK(run_cli("" + quiet).code == 2);
  CHECK(run_cli("frobnicate" + quiet).code == 2);
  CHECK(run_cli("gap --frobnicate" + quiet).code == 2);
  CHECK(run_cli("relax --kernel maxwell" + quiet).code == 2);
  CHECK(run_cli("relax --tend 1 --kernel square" + quiet).code == 2);
  CHECK(run_cli("gap --config " + s("missing.json") + quiet).code == 3);
  CHECK(run_cli("gap --config " + s("bad.json") + quiet).code == 3);
  CHECK(run_cli("spectrum --nmax -1" + quiet).code == 3);
  CHECK(run_cli("hydrolimit --eps 0.25,0.5 --res 6 --nx 16" + quiet).code == 3);

  SUBCASE("failed check is named on stderr") {
    // the 8^3 grid is too coarse for the 1% energy eigenvalue check
    const CliResult r = run_cli("operator --res 8 --check --manifest " + s("m.json") + " 2>&1 >/dev/null");
    CHECK(r.code == 4);
    CHECK(r.out.find("energy_eigenvalue") != std::string::npos);
    CHECK(nlohmann::json::parse(slurp(s("m.json")))["failed_check"] == "energy_eigenvalue");
  }
}

TEST_CASE("byte-identical outputs") {
  const Scratch s;
  auto twice = [&](const std::string& args, const std::string& env_a = "", const std::string& env_b = "") {
    REQUIRE(run_cli(args + " --out " + s("a.csv") + " 2>/dev/null", env_a).code == 0);
    REQUIRE(run_cli(args + " --out " + s("b.csv") + " 2>/dev/null", env_b).code == 0);
    const std::string a = slurp(s("a.csv"));
    CHECK(!a.empty());
    return a == slurp(s("b.csv"));
  };
  CHECK(twice("spectrum --nmax 6 --lmax 6 --config " + s("inelastic.json")));
  CHECK(twice("relax --res 8 --tend 4 --kernel hs --config " + s("inelastic.json")));
  CHECK(twice("hydrolimit --res 6 --nx 16 --eps 0.5,0.25 --tend 0.02"));
  CHECK(twice("cell --res 8 --config " + s("inelastic.json")));
  CHECK(twice("relax --method particle --kernel hs --n 20000 --tend 1 --seed 77", "GRANKIN_THREADS=1",
              "GRANKIN_THREADS=4"));
  const std::string particles = "relax --method particle --kernel maxwell --n 2000 --tend 1";
  REQUIRE(run_cli(particles + " --seed 1 --out " + s("a.csv") + " 2>/dev/null").code == 0);
  REQUIRE(run_cli(particles + " --seed 2 --out " + s("b.csv") + " 2>/dev/null").code == 0);
  CHECK(slurp(s("a.csv")) != slurp(s("b.csv")));
}
