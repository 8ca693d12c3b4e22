#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mather/errors.hpp"
#include "mather/solvers.hpp"

namespace mather {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,          // bad flags, config, or input files
  kExitNotConverged = 2,
  kExitModelInvalid = 3,    // model failed validation (twist, periodicity)
  kExitDegenerate = 4,      // mountain pass found no positive barrier
  kExitNotComparable = 5,
  kExitCertificate = 6,
};

int exit_code_for(Errc code) noexcept;

/// Everything a command may read. Flags and config-file keys share names
/// (dashes in flags, underscores in keys).
struct RunConfig {
  std::string builtin = "standard_fk";
  std::vector<double> K = {0.0};       // sweep: the K grid
  std::optional<std::vector<double>> omega;
  std::int64_t N = 610;
  SolveOptions solve;
  std::string out = "out";
  double T = 50.0;                     // flow horizon
  std::string input;                   // flow/solve: start hull; verify: configuration CSV
  std::string h_minus, h_plus;         // critical inputs
  bool shift_by_one = false;
  bool omega_birkhoff = false;
  int s_grid = 11;
  double T_flow = 200.0;
  int refine_rounds = 60;
  std::int64_t k_range = 2, l_range = 2;
  std::int64_t box = 3;
  int trials = 1000;
  double amplitude = 0.5;
  double el_tol = 1e-7;

  static constexpr double kDefaultOmega = 0.6180339887498949;
  std::vector<double> omega_or_default() const {
    return omega ? *omega : std::vector<double>{kDefaultOmega};
  }
};

/// Applies the keys of a config-file object. Unknown keys and wrongly typed
/// values throw Errc::parse_error.
void apply_config_json(RunConfig& cfg, const nlohmann::json& j);

/// Full tool entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace mather
