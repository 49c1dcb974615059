#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chlab/chlab.hpp"

namespace chlab::scenario {

/// Process exit codes shared by the CLI and the scenario runners.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitStopped = 3;      // blow-up or peakon collision
inline constexpr int kExitNonFinite = 4;
inline constexpr int kExitCheckFailed = 5;  // a numerical check was violated

struct ProbeSettings {
  double eps = 1e-8;
  std::optional<double> min_width;  // defaults to 4*dx of the scenario grid
  std::optional<double> mass_tol;
  std::optional<double> ineq_tol;
};

struct PeakonSettings {
  std::vector<double> q;
  std::vector<double> p;
  double t_end = 1.0;
  double dt = 1e-3;
  Index record_every = 1;
  bool compare_pde = false;
};

struct Scenario {
  Grid<double> grid = Grid<double>::circle(256);
  model::ModelSpec<double> model;
  std::string initial_type = "zero";
  std::function<Field<double>(const Grid<double>&)> initial;
  integrator::SolverConfig<double> solver;
  ProbeSettings probe;
  std::optional<PeakonSettings> peakon;
  std::filesystem::path output_dir = "out";
};

/// Parses and validates a scenario file.  Throws ConfigError on any schema
/// violation, unknown key, or out-of-range value.
Scenario load_scenario(const std::filesystem::path& config_path);

/// Evolves the scenario's initial data and writes snapshot_<k>.csv files, a
/// snapshots.csv manifest, diagnostics.csv, and run_summary.json into out_dir.
int run_simulate(const Scenario& sc, const std::filesystem::path& out_dir,
                 std::ostream& log);

/// Reads snapshots previously written by run_simulate, detects vanishing
/// intervals, probes each one, and writes probe_report.json.  The selector is
/// empty (all snapshots), an integer snapshot index, or a decimal time
/// (nearest snapshot).
int run_probe(const Scenario& sc, const std::filesystem::path& out_dir,
              const std::string& snapshot_selector, std::ostream& log);

/// Evolves the scenario's peakon system, writing peakon_trajectory.csv and
/// run_summary.json; with compare_pde set, also runs the matched PDE
/// evolution and writes comparison.csv.
int run_peakon(const Scenario& sc, const std::filesystem::path& out_dir,
               std::ostream& log);

/// Randomized strict-inequality and floor-identity checks on both kernel
/// derivatives; prints margins.
int run_kernelcheck(std::uint64_t trials, std::uint64_t seed, std::ostream& log);

/// Compares two snapshot CSV files; exits non-zero when the relative L2
/// difference exceeds tol.
int run_compare(const std::filesystem::path& a, const std::filesystem::path& b,
                std::optional<double> tol, std::ostream& log);

}  // namespace chlab::scenario
