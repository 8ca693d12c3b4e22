#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "mather/cli.hpp"
#include "mather/io.hpp"
#include "support.hpp"

using namespace mather;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::path(MATHER_TEST_DIR) / "cli_runs";

// Runs the tool with `args`, output directory `name` under the scratch root.
int run(const std::string& name, const std::string& args) {
  const fs::path out = kRoot / name;
  fs::remove_all(out);
  fs::create_directories(out);
  const std::string cmd = std::string("\"") + MATHER_HULL_EXE + "\" " + args + " --out \"" +
                          out.string() + "\" > \"" + (out / "stdout.txt").string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

nlohmann::json result(const std::string& name, const std::string& file) {
  return read_json_file(kRoot / name / file);
}

fs::path scratch_file(const std::string& name, const std::string& text) {
  fs::create_directories(kRoot);
  const fs::path p = kRoot / name;
  write_text_file(p, text);
  return p;
}

}  // namespace

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(Errc::twist_violation) == kExitModelInvalid);
  CHECK(exit_code_for(Errc::periodicity_violation) == kExitModelInvalid);
  CHECK(exit_code_for(Errc::not_comparable) == kExitNotComparable);
  CHECK(exit_code_for(Errc::parse_error) == kExitConfig);
  CHECK(exit_code_for(Errc::invalid_argument) == kExitConfig);
}

TEST_CASE("config keys") {
  RunConfig cfg;
  apply_config_json(cfg, nlohmann::json{{"K", {0.1, 0.2}}, {"N", 34}, {"omega", {0.5}}, {"tol", 1e-9}});
  CHECK(cfg.K == std::vector<double>{0.1, 0.2});
  CHECK(cfg.N == 34);
  CHECK(cfg.solve.residual_tol == 1e-9);
  apply_config_json(cfg, nlohmann::json{{"K", 0.7}});
  CHECK(cfg.K == std::vector<double>{0.7});
  CHECK(test::error_code_of([&] { apply_config_json(cfg, nlohmann::json{{"bogus", 1}}); }) ==
        Errc::parse_error);
  CHECK(test::error_code_of([&] { apply_config_json(cfg, nlohmann::json{{"N", "many"}}); }) ==
        Errc::parse_error);
}

TEST_CASE("solve") {
  CHECK(run("solve_k0", "solve --builtin standard_fk --K 0 --omega 0.5 --N 10") == 0);
  const auto j = result("solve_k0", "result.json");
  CHECK(j["energy"].get<double>() == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(j["converged"] == true);
  CHECK(fs::exists(kRoot / "solve_k0" / "hull.csv"));
  CHECK(fs::exists(kRoot / "solve_k0" / "history.csv"));
  CHECK(fs::exists(kRoot / "solve_k0" / "metadata.json"));

  CHECK(run("solve_half", "solve --K 0.5 --N 89 --tol 1e-8") == 0);
  CHECK(result("solve_half", "result.json")["residual_sup"].get<double>() <= 1e-8);

  CHECK(run("solve_budget", "solve --K 0.5 --N 89 --tol 1e-12 --max-steps 3") == 2);
  CHECK(result("solve_budget", "result.json")["converged"] == false);
}

TEST_CASE("solve is deterministic") {
  REQUIRE(run("det_a", "solve --K 1 --N 55 --seed 3") == 0);
  REQUIRE(run("det_b", "solve --K 1 --N 55 --seed 3") == 0);
  CHECK(read_text_file(kRoot / "det_a" / "result.json") ==
        read_text_file(kRoot / "det_b" / "result.json"));
}

TEST_CASE("config files merge with flags") {
  const auto bad = scratch_file("bad.json", "{\"K\": [0, ");
  CHECK(run("cfg_bad", "solve --config \"" + bad.string() + "\"") == 1);
  const auto unknown = scratch_file("unknown.json", "{\"K\": 0, \"colour\": 1}");
  CHECK(run("cfg_unknown", "solve --config \"" + unknown.string() + "\"") == 1);
  const auto good = scratch_file("good.json", "{\"K\": 0, \"N\": 10, \"omega\": [0.3]}");
  CHECK(run("cfg_good", "solve --config \"" + good.string() + "\" --omega 0.5") == 0);
  CHECK(result("cfg_good", "result.json")["energy"].get<double>() ==
        doctest::Approx(0.125).epsilon(1e-14));
  CHECK(run("cfg_method", "solve --K 0 --N 10 --omega 0.5 --method simplex") == 1);
}

TEST_CASE("flow") {
  CHECK(run("flow", "flow --K 1 --N 34 --T 5") == 0);
  CHECK(result("flow", "result.json")["time"].get<double>() == doctest::Approx(5.0));
}

TEST_CASE("critical") {
  CHECK(run("crit_pinned", "critical --K 2 --N 89 --shift-by-one") == 0);
  const auto j = result("crit_pinned", "barrier.json");
  CHECK(j["barrier"].get<double>() > 0.0);
  CHECK(j["residual_sup"].get<double>() <= 1e-6);
  CHECK(fs::exists(kRoot / "crit_pinned" / "profile.csv"));

  CHECK(run("crit_flat", "critical --K 0 --N 34 --shift-by-one --T-flow 20") == 4);
  CHECK(result("crit_flat", "barrier.json")["case"] == "degenerate");

  std::string lo = "theta,h\n", hi = "theta,h\n";
  for (int k = 0; k < 10; ++k) {
    lo += format_real(k / 10.0) + "," + format_real(k / 10.0 + 0.5) + "\n";
    hi += format_real(k / 10.0) + "," + format_real(k / 10.0) + "\n";
  }
  const auto a = scratch_file("lo.csv", lo), b = scratch_file("hi.csv", hi);
  CHECK(run("crit_unordered", "critical --K 0 --N 10 --omega 0.3 --h-minus \"" + a.string() +
                                  "\" --h-plus \"" + b.string() + "\"") == 5);
}

TEST_CASE("verify") {
  std::string csv = "i_1,u\n";
  for (int i = -8; i <= 8; ++i) csv += std::to_string(i) + "," + format_real(0.5 * i) + "\n";
  const auto good = scratch_file("affine.csv", csv);
  CHECK(run("verify_ok", "verify --K 0 --omega 0.5 --omega-birkhoff --input \"" + good.string() + "\"") == 0);
  CHECK(result("verify_ok", "certificates.json")["passed"] == true);

  std::string moved = "i_1,u\n";
  for (int i = -8; i <= 8; ++i) moved += std::to_string(i) + "," + format_real(0.5 * i + (i == 1 ? 0.3 : 0.0)) + "\n";
  const auto bad = scratch_file("moved.csv", moved);
  CHECK(run("verify_bad", "verify --K 0 --input \"" + bad.string() + "\"") == 6);
  const auto j = result("verify_bad", "certificates.json");
  CHECK(j["passed"] == false);
  bool witness = false;
  for (const auto& c : j["certificates"]) witness = witness || !c["witnesses"].empty();
  CHECK(witness);

  CHECK(run("verify_noomega", "verify --K 0 --omega-birkhoff --input \"" + good.string() + "\"") == 1);
  const auto junk = scratch_file("junk.csv", "i_1,u\n0,zero\n");
  CHECK(run("verify_junk", "verify --K 0 --input \"" + junk.string() + "\"") == 1);
}

TEST_CASE("sweep") {
  CHECK(run("sweep_k0", "sweep --K 0 --N 10 --omega 0.5") == 0);
  const auto j = result("sweep_k0", "result.json");
  REQUIRE(j["records"].size() == 1);
  CHECK(j["records"][0]["largest_gap"].get<double>() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(fs::exists(kRoot / "sweep_k0" / "sweep.csv"));

  CHECK(run("sweep_two", "sweep --K 0,0.5 --N 34") == 0);
  CHECK(result("sweep_two", "result.json")["records"].size() == 2);

  const auto empty = scratch_file("empty_k.json", "{\"K\": []}");
  CHECK(run("sweep_empty", "sweep --config \"" + empty.string() + "\" --N 10") == 1);
}

TEST_CASE("usage errors") {
  CHECK(run("no_command", "") == 1);
  CHECK(run("bad_flag", "solve --frobnicate") == 1);
}
