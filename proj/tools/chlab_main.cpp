#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "chlab/scenario.hpp"

namespace {

namespace sc = chlab::scenario;

/// Maps library exceptions onto the documented exit codes.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const chlab::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sc::kExitConfig;
  } catch (const chlab::CollisionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sc::kExitStopped;
  } catch (const chlab::NonFiniteState& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sc::kExitNonFinite;
  } catch (const chlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sc::kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sc::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return sc::kExitInternal;
  }
}

std::filesystem::path resolve_out(const sc::Scenario& scenario,
                                  const std::string& out_flag) {
  return out_flag.empty() ? scenario.output_dir
                          : std::filesystem::path(out_flag);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "chlab: time evolution, peakon dynamics, and unique-continuation "
      "probing for non-local shallow-water wave models"};
  app.require_subcommand(1);

  std::string config, out_flag, snapshot_sel;
  std::uint64_t trials = 1000000, seed = 0;
  std::string file_a, file_b;
  std::optional<double> tol;

  auto* simulate = app.add_subcommand(
      "simulate", "evolve a scenario and write snapshots and diagnostics");
  simulate->add_option("--config", config, "scenario file")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("--out", out_flag,
                       "output directory (default: scenario's)");

  auto* probe = app.add_subcommand(
      "probe",
      "detect vanishing intervals in recorded snapshots and probe each one");
  probe->add_option("--config", config, "scenario file")
      ->required()
      ->check(CLI::ExistingFile);
  probe->add_option("--out", out_flag,
                    "directory holding the snapshots (default: scenario's)");
  probe->add_option("--snapshot", snapshot_sel,
                    "snapshot index or decimal time (default: all)");

  auto* kernelcheck = app.add_subcommand(
      "kernelcheck",
      "randomized strict-inequality checks on the kernel derivatives");
  kernelcheck->add_option("--trials", trials, "number of random trials");
  kernelcheck->add_option("--seed", seed, "RNG seed")->required();

  auto* peakon = app.add_subcommand(
      "peakon", "evolve the scenario's peakon system, optionally against the "
                "full solver");
  peakon->add_option("--config", config, "scenario file")
      ->required()
      ->check(CLI::ExistingFile);
  peakon->add_option("--out", out_flag,
                     "output directory (default: scenario's)");

  auto* compare =
      app.add_subcommand("compare", "compare two snapshot CSV files");
  compare->add_option("a", file_a, "snapshot file")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("b", file_b, "reference snapshot file")
      ->required()
      ->check(CLI::ExistingFile);
  compare->add_option("--tol", tol,
                      "fail (exit 5) when relative L2 difference exceeds this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Normalize CLI11's own exit codes onto the documented contract:
    // usage errors are configuration errors.
    const int rc = app.exit(e);
    return rc == 0 ? sc::kExitOk : sc::kExitConfig;
  }

  if (*simulate) {
    return guarded([&] {
      const auto scenario = sc::load_scenario(config);
      return sc::run_simulate(scenario, resolve_out(scenario, out_flag),
                              std::cout);
    });
  }
  if (*probe) {
    return guarded([&] {
      const auto scenario = sc::load_scenario(config);
      return sc::run_probe(scenario, resolve_out(scenario, out_flag),
                           snapshot_sel, std::cout);
    });
  }
  if (*kernelcheck) {
    return guarded([&] { return sc::run_kernelcheck(trials, seed, std::cout); });
  }
  if (*peakon) {
    return guarded([&] {
      const auto scenario = sc::load_scenario(config);
      return sc::run_peakon(scenario, resolve_out(scenario, out_flag),
                            std::cout);
    });
  }
  if (*compare) {
    return guarded(
        [&] { return sc::run_compare(file_a, file_b, tol, std::cout); });
  }
  return sc::kExitInternal;
}
