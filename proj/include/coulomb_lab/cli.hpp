#pragma once

// Experiment harness behind the coulomb-lab executable: configuration,
// subcommands and the files they leave in the output directory.
//
// Config files hold `section.key = value` lines; '#' starts a comment.
// Command-line flags override file values key by key.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coulomb_lab/coulomb.hpp"
#include "coulomb_lab/penalized.hpp"

namespace clab::cli {

enum ExitCode { kOk = 0, kUsage = 2, kSolver = 3, kIo = 4 };

using KeyValues = std::map<std::string, std::string>;

struct RunConfig {
  std::string command;

  int grid_n = 64;
  double grid_R = 2.5;

  /// Resolved coupling; set from either coupling.q or coupling.mass.
  double q = 0.0;
  std::optional<double> mass;

  std::optional<double> M;  // empty means auto
  double eta = 0.5;
  double tau_supp = 0.0;

  double tol = 1e-5;
  int max_iters = 1500;
  std::uint64_t seed = 0;
  PenaltyMode mode = PenaltyMode::project;
  double ground_tol = 1e-6;
  KernelMode kernel = KernelMode::tabulated;

  std::string shape = "ball";
  bool random_start = false;

  std::filesystem::path out = "out";

  std::vector<double> sweep_list{0.2, 0.1, 0.05, 0.02};
  int jobs = 1;
  bool continuation = true;

  int axis = 1;
  double c4_ref = 2.0;
  double t_max = -1.0;

  std::vector<int> n_list{1, 2, 4};
  std::vector<double> separations{6.4};
  int cells = 6;

  std::vector<double> q_list{0.0, 0.02, 0.05, 0.1};

  std::vector<std::filesystem::path> inputs;

  PenaltySpec penalty() const;
};

/// Parses config text into keys. Throws UsageError with the line number.
KeyValues parse_config_text(const std::string& text);
/// Throws IoError when the file cannot be read.
KeyValues read_config_file(const std::filesystem::path& path);

/// Validates and converts; errors name the offending key. Exactly one of
/// coupling.q and coupling.mass is required by the commands that solve.
RunConfig resolve(const std::string& command, const KeyValues& kv);

/// Resolved configuration as JSON (M written as a number after resolution).
std::string config_json(const RunConfig& cfg);

// Each subcommand writes into cfg.out and returns normally or throws.
void ground_state(const RunConfig& cfg);
void optimize(const RunConfig& cfg);
void sweep_q(const RunConfig& cfg);
void surgery_check(const RunConfig& cfg);
void counterexample(const RunConfig& cfg);
void radial(const RunConfig& cfg);
/// Reads result.json / u.scf under each input directory. Throws IoError
/// when no run is found.
void plot(const RunConfig& cfg);

/// Mid-plane (z = 0) cross-section of u as a grayscale SVG.
std::string midplane_svg(const ScalarField& u);

/// Runs the command and writes manifest.json (resolved config, versions,
/// argv and wall time) next to its outputs.
void execute(const RunConfig& cfg, const std::vector<std::string>& argv = {});

/// Usage and resolution problems map to kUsage, file problems to kIo,
/// everything else to kSolver.
int exit_code(const std::exception& e);

/// Entry point: parses argv, runs, maps exceptions to exit codes.
int main(int argc, char** argv);

}  // namespace clab::cli
