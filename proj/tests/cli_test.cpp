#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "testutil.hpp"

using namespace chlab;
using namespace testutil;

namespace {

std::string cli() { return std::string(CHLAB_CLI_PATH); }

std::string q(const std::filesystem::path& p) {
  return "'" + p.string() + "'";
}

const std::string kCircleConfig = R"({
  "schema_version": 1,
  "domain": {"kind": "circle"},
  "grid": {"n": 64},
  "initial": {"type": "cosine", "k": 1, "amplitude": 0.2},
  "solver": {"t_end": 0.1, "dt": 0.01}
})";

}  // namespace

TEST_CASE("cli: usage errors exit with the configuration code") {
  CHECK(run_command(cli()).exit_code == 2);
  CHECK(run_command(cli() + " frobnicate").exit_code == 2);
  CHECK(run_command(cli() + " simulate").exit_code == 2);  // --config required
  CHECK(run_command(cli() + " simulate --config /no/such/file.json").exit_code ==
        2);
  CHECK(run_command(cli() + " kernelcheck --trials 100").exit_code ==
        2);  // seed must be explicit
  CHECK(run_command(cli() + " --help").exit_code == 0);
}

TEST_CASE("cli: kernelcheck") {
  const auto r = run_command(cli() + " kernelcheck --trials 20000 --seed 7");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("min_margin_line") != std::string::npos);
  CHECK(r.output.find("floor_mismatches=0") != std::string::npos);

  SUBCASE("byte-identical for a fixed seed") {
    const auto again =
        run_command(cli() + " kernelcheck --trials 20000 --seed 7");
    CHECK(again.output == r.output);
  }
  SUBCASE("a different seed moves the margins") {
    const auto other =
        run_command(cli() + " kernelcheck --trials 20000 --seed 8");
    CHECK(other.exit_code == 0);
    CHECK(other.output != r.output);
  }
  SUBCASE("zero trials is a configuration error") {
    CHECK(run_command(cli() + " kernelcheck --trials 0 --seed 1").exit_code ==
          2);
  }
}

TEST_CASE("cli: simulate and probe round trip") {
  const auto dir = make_temp_dir("chlab-cli");
  const auto cfg = dir / "config.json";
  write_file(cfg, kCircleConfig);
  const auto out = dir / "out";

  const auto sim = run_command(cli() + " simulate --config " + q(cfg) +
                               " --out " + q(out));
  CHECK(sim.exit_code == 0);
  CHECK(sim.output.find("status=Completed") != std::string::npos);
  CHECK(std::filesystem::exists(out / "run_summary.json"));
  CHECK(std::filesystem::exists(out / "diagnostics.csv"));

  SUBCASE("probe consumes the recorded snapshots") {
    const auto pr = run_command(cli() + " probe --config " + q(cfg) +
                                " --out " + q(out) + " --snapshot 0");
    CHECK(pr.exit_code == 0);
    CHECK(std::filesystem::exists(out / "probe_report.json"));
  }
  SUBCASE("probe without snapshots is a configuration error") {
    const auto pr = run_command(cli() + " probe --config " + q(cfg) +
                                " --out " + q(dir / "empty"));
    CHECK(pr.exit_code == 2);
    CHECK(pr.output.find("run simulate first") != std::string::npos);
  }
  SUBCASE("repeat runs are byte-identical") {
    const auto out2 = dir / "out2";
    run_command(cli() + " simulate --config " + q(cfg) + " --out " + q(out2));
    CHECK(read_file(out / "snapshot_1.csv") ==
          read_file(out2 / "snapshot_1.csv"));
    CHECK(read_file(out / "diagnostics.csv") ==
          read_file(out2 / "diagnostics.csv"));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli: configuration rejection") {
  const auto dir = make_temp_dir("chlab-cli");
  SUBCASE("unknown key is reported by name") {
    const auto cfg = dir / "bad.json";
    write_file(cfg, R"({"schema_version": 1, "domain": {"kind": "circle"},
                        "grid": {"n": 64}, "typo_key": true})");
    const auto r = run_command(cli() + " simulate --config " + q(cfg));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("typo_key") != std::string::npos);
  }
  SUBCASE("malformed json") {
    const auto cfg = dir / "broken.json";
    write_file(cfg, "{broken");
    CHECK(run_command(cli() + " simulate --config " + q(cfg)).exit_code == 2);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli: stop conditions map to exit codes") {
  const auto dir = make_temp_dir("chlab-cli");
  const auto cfg = dir / "blow.json";
  write_file(cfg, R"({
    "schema_version": 1,
    "domain": {"kind": "line", "half_length": 20.0},
    "grid": {"n": 1024},
    "initial": {"type": "multipeakon", "q": [-1.0, 1.0], "p": [1.0, -1.0]},
    "solver": {"t_end": 3.0, "blowup_threshold": 6.0}
  })");
  const auto r = run_command(cli() + " simulate --config " + q(cfg) +
                             " --out " + q(dir / "out"));
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("BlowUpSuspected") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli: peakon subcommand") {
  const auto dir = make_temp_dir("chlab-cli");
  SUBCASE("single peakon completes") {
    const auto cfg = dir / "peakon.json";
    write_file(cfg, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 20.0},
      "grid": {"n": 64},
      "peakon": {"q": [0.0], "p": [1.0], "t_end": 1.0, "dt": 0.001,
                 "record_every": 100}
    })");
    const auto r = run_command(cli() + " peakon --config " + q(cfg) +
                               " --out " + q(dir / "out"));
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(dir / "out" / "peakon_trajectory.csv"));
  }
  SUBCASE("an empty peakon list is rejected") {
    const auto cfg = dir / "empty.json";
    write_file(cfg, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 20.0},
      "grid": {"n": 64},
      "peakon": {"q": [], "p": []}
    })");
    CHECK(run_command(cli() + " peakon --config " + q(cfg)).exit_code == 2);
  }
  SUBCASE("colliding pair exits with the stop code") {
    const auto cfg = dir / "collide.json";
    write_file(cfg, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 20.0},
      "grid": {"n": 64},
      "peakon": {"q": [-1.0, 1.0], "p": [1.0, -1.0], "t_end": 5.0, "dt": 0.001}
    })");
    CHECK(run_command(cli() + " peakon --config " + q(cfg) + " --out " +
                      q(dir / "out3"))
              .exit_code == 3);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("cli: compare subcommand") {
  const auto dir = make_temp_dir("chlab-cli");
  const auto grid = Grid<double>::line(5.0, 64);
  std::mt19937_64 rng(21);
  const auto u = random_gaussians(grid, 2, rng);
  const auto pa = dir / "a.csv";
  const auto pb = dir / "b.csv";
  fields::write_csv(pa, u);

  SUBCASE("equal files") {
    fields::write_csv(pb, u);
    CHECK(run_command(cli() + " compare " + q(pa) + " " + q(pb)).exit_code ==
          0);
  }
  SUBCASE("difference beyond tolerance exits with the check-failed code") {
    auto v = u;
    v.values[5] += 1e-3;
    fields::write_csv(pb, v);
    CHECK(run_command(cli() + " compare " + q(pa) + " " + q(pb) +
                      " --tol 1e-9")
              .exit_code == 5);
    CHECK(run_command(cli() + " compare " + q(pa) + " " + q(pb) +
                      " --tol 1.0")
              .exit_code == 0);
  }
  SUBCASE("missing operand") {
    CHECK(run_command(cli() + " compare " + q(pa)).exit_code == 2);
  }
  std::filesystem::remove_all(dir);
}
