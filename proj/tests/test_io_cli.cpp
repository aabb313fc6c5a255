#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "trekit/matrix_io.hpp"

using namespace trekit;
using namespace trekit::testing;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "trekit_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the tre-kit binary (path from TRE_KIT_BIN) and captures stdout.
int run_cli(const std::string& args, const fs::path& out_file) {
  const char* bin = std::getenv("TRE_KIT_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "TRE_KIT_BIN must point at the tre-kit binary");
  const std::string cmd =
      std::string("\"") + bin + "\" " + args + " > \"" + out_file.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("matrix files: bitwise round-trip at full precision") {
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    TrialRng rng(81, fnv1a64("io_roundtrip"), trial);
    const int dim = 1 + static_cast<int>(trial % 5);
    const HermitianMatrix h = random_hermitian(rng, dim);
    const CMatrix back = matrix_from_json(matrix_to_json(h.entries()));
    REQUIRE(back.rows() == dim);
    CHECK((back.array() == h.entries().array()).all());
  }

  // 17 significant digits are emitted
  CMatrix third(1, 1);
  third(0, 0) = Complex(1.0 / 3.0, 0.0);
  CHECK(matrix_to_json(third).find("0.33333333333333331") != std::string::npos);
}

TEST_CASE("matrix files: write/read through the filesystem") {
  const fs::path p = work_dir() / "roundtrip.json";
  TrialRng rng(82, fnv1a64("io_file"), 0);
  const DensityMatrix rho = random_mixed_state(rng, 4, 4);
  write_matrix_file(p, rho.entries());
  const DensityMatrix back = read_density_file(p);
  CHECK((back.entries().array() == rho.entries().array()).all());
}

TEST_CASE("matrix files: malformed inputs are rejected") {
  CHECK_THROWS_AS(matrix_from_json("not json at all"), ParseError);
  CHECK_THROWS_AS(matrix_from_json("{\"dim\": 2}"), ParseError);
  CHECK_THROWS_AS(matrix_from_json("{\"dim\": 0, \"entries\": []}"), ParseError);
  CHECK_THROWS_AS(matrix_from_json("{\"dim\": 2, \"entries\": [[[1,0]],[[0,0]]]}"), ParseError);
  CHECK_THROWS_AS(matrix_from_json("{\"dim\": 1, \"entries\": [[[1]]]}"), ParseError);
  CHECK_THROWS_AS(read_matrix_file("/nonexistent/file.json"), ParseError);
}

TEST_CASE("digest: stable and input-sensitive") {
  CHECK(fnv1a_hex("abc") == fnv1a_hex("abc"));
  CHECK(fnv1a_hex("abc") != fnv1a_hex("abd"));
  CHECK(fnv1a_hex("abc").size() == 16);
}

TEST_CASE("report JSON: schema keys and non-finite encoding") {
  CheckReport r;
  r.check_name = "demo";
  r.trials = 3;
  r.violations = 1;
  r.min_margin = -std::numeric_limits<double>::infinity();
  r.p1 = -1.0;
  r.p50 = 0.5;
  r.p99 = std::numeric_limits<double>::infinity();
  r.seed = 9;
  r.tol = 1e-9;
  r.config_digest = "deadbeefdeadbeef";
  const nlohmann::json j = nlohmann::json::parse(report_to_json(r));
  CHECK(j["check_name"] == "demo");
  CHECK(j["min_margin"] == "-inf");
  CHECK(j["quantiles"]["p99"] == "inf");
  CHECK(j["quantiles"]["p50"] == 0.5);
  CHECK(j["seed"] == 9);
  CHECK(j["config_digest"].get<std::string>().size() == 16);
}

TEST_CASE("cli: compute on identical and orthogonal states") {
  const fs::path dir = work_dir();
  TrialRng rng(83, fnv1a64("cli_compute"), 0);
  const DensityMatrix rho = random_mixed_state(rng, 3, 3);
  write_matrix_file(dir / "rho.json", rho.entries());

  const fs::path out = dir / "out.json";
  int code = run_cli("compute --rho \"" + (dir / "rho.json").string() + "\" --sigma \"" +
                         (dir / "rho.json").string() + "\" --a 0.5",
                     out);
  CHECK(code == 0);
  nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(std::abs(j["value"].get<double>()) < 1e-12);
  CHECK(j["support_contained"] == true);

  // orthogonal pure states: ordinary S is infinite, serialized as "inf"
  write_matrix_file(dir / "e0.json", diag_real({1, 0}));
  write_matrix_file(dir / "e1.json", diag_real({0, 1}));
  code = run_cli("compute --rho \"" + (dir / "e0.json").string() + "\" --sigma \"" +
                     (dir / "e1.json").string() + "\" --ordinary",
                 out);
  CHECK(code == 0);
  j = nlohmann::json::parse(slurp(out));
  CHECK(j["value"] == "inf");
  CHECK(j["support_contained"] == false);

  // block-orthogonal states give exactly 1 at a = 0.5
  code = run_cli("compute --rho \"" + (dir / "e0.json").string() + "\" --sigma \"" +
                     (dir / "e1.json").string() + "\" --a 0.5",
                 out);
  CHECK(code == 0);
  j = nlohmann::json::parse(slurp(out));
  CHECK(std::abs(j["value"].get<double>() - 1.0) <= 1e-10);

  // gradient payload parses back into a matrix
  write_matrix_file(dir / "sig.json", random_mixed_state(rng, 3, 3).entries());
  code = run_cli("compute --rho \"" + (dir / "rho.json").string() + "\" --sigma \"" +
                     (dir / "sig.json").string() + "\" --a 0.3 --gradient 2",
                 out);
  CHECK(code == 0);
  j = nlohmann::json::parse(slurp(out));
  REQUIRE(j.contains("gradient"));
  CHECK(j["gradient"]["dim"] == 3);
  CHECK_NOTHROW(matrix_from_json(j["gradient"].dump()));

  // ordinary gradient on full-rank inputs
  code = run_cli("compute --rho \"" + (dir / "rho.json").string() + "\" --sigma \"" +
                     (dir / "sig.json").string() + "\" --ordinary --gradient 1",
                 out);
  CHECK(code == 0);
  CHECK(nlohmann::json::parse(slurp(out)).contains("gradient"));

  // gradient on mismatched supports is a numerical failure
  code = run_cli("compute --rho \"" + (dir / "e0.json").string() + "\" --sigma \"" +
                     (dir / "e1.json").string() + "\" --ordinary --gradient 1",
                 out);
  CHECK(code == 3);
}

TEST_CASE("cli: malformed inputs exit 2") {
  const fs::path out = work_dir() / "err.json";
  CHECK(run_cli("compute --rho /no/such.json --sigma /no/such.json --a 0.5", out) == 2);
  CHECK(run_cli("verify --theorem nosuch", out) == 2);
  CHECK(run_cli("sweep --a-grid 2.0 --t-grid 0.5", out) == 2);
  CHECK(run_cli("compute --rho x.json --sigma y.json", out) == 2);  // neither --a nor --ordinary
  CHECK(run_cli("bogus-subcommand", out) == 2);

  // boundary telescope parameter is a flag error, not a crash
  const fs::path dir = work_dir();
  write_matrix_file(dir / "m.json", diag_real({0.5, 0.5}));
  CHECK(run_cli("compute --rho \"" + (dir / "m.json").string() + "\" --sigma \"" +
                    (dir / "m.json").string() + "\" --a 1.0",
                out) == 2);
}

TEST_CASE("cli: verify writes reports and respects the seed env fallback") {
  const fs::path dir = work_dir();
  const fs::path rep1 = dir / "rep1.json";
  const fs::path rep2 = dir / "rep2.json";
  const fs::path out = dir / "verify_out.txt";

  int code = run_cli("verify --theorem triangle1 --trials 40 --dim 2 --seed 7 --report \"" +
                         rep1.string() + "\"",
                     out);
  CHECK(code == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(rep1));
  CHECK(j["overall_pass"] == true);
  REQUIRE(j["reports"].size() == 1);
  CHECK(j["reports"][0]["check_name"] == "triangle1");
  CHECK(j["reports"][0]["trials"] == 40);
  CHECK(j["reports"][0]["violations"] == 0);

  // TRE_KIT_SEED fallback reproduces --seed 7 byte for byte
  const char* bin = std::getenv("TRE_KIT_BIN");
  const std::string cmd = std::string("TRE_KIT_SEED=7 \"") + bin +
                          "\" verify --theorem triangle1 --trials 40 --dim 2 --report \"" +
                          rep2.string() + "\" > /dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(slurp(rep1) == slurp(rep2));

  // csv rendering has the stable header
  const fs::path repc = dir / "rep.csv";
  code = run_cli("verify --theorem triangle1 --trials 10 --dim 2 --seed 7 --format csv --report \"" +
                     repc.string() + "\"",
                 out);
  CHECK(code == 0);
  CHECK(slurp(repc).rfind("check_name,trials,violations,min_margin,p1,p50,p99,seed,tol,config_digest\n", 0) == 0);

  // a found violation exits 1: tol = 0 makes harmless fp noise count
  code = run_cli("verify --theorem triangle1 --trials 100 --dim 2 --dim 3 --seed 7 --tol 0",
                 out);
  CHECK(code == 1);
  CHECK(slurp(out).find("FAIL") != std::string::npos);
}

TEST_CASE("cli: equality family and sweep output") {
  const fs::path dir = work_dir();
  const fs::path out = dir / "eq_out.txt";
  int code = run_cli("verify --theorem triangle2 --equality-family --a 0.5 --t 0.3", out);
  CHECK(code == 0);
  CHECK(slurp(out).find("triangle2_equality") != std::string::npos);

  code = run_cli("sweep --a-grid 0.5 --t-grid 0,0.3", out);
  CHECK(code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("a,t,bound_tight,bound_linear,achieved\n", 0) == 0);
  CHECK(csv.find("\n0.5,0,0,0,0\n") != std::string::npos);
}

TEST_CASE("cli: limits with a convergence schedule") {
  const fs::path dir = work_dir();
  write_matrix_file(dir / "lrho.json", diag_real({1, 0}));
  write_matrix_file(dir / "lsig.json", diag_real({0.5, 0.5}));
  const fs::path out = dir / "limits_out.json";
  const int code = run_cli("limits --rho \"" + (dir / "lrho.json").string() + "\" --sigma \"" +
                               (dir / "lsig.json").string() +
                               "\" --a-schedule 1e-2,1e-4,1e-6",
                           out);
  CHECK(code == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j["s0"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(j["s1"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(j["schedule"].size() == 3);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& row : j["schedule"]) {
    const double gap = row["gap_to_s0"].get<double>();
    CHECK(gap < prev);
    prev = gap;
  }
}
