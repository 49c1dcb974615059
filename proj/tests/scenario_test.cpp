#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "testutil.hpp"

#include <sstream>

#include "chlab/scenario.hpp"
#include "json.hpp"

using namespace chlab;
using namespace testutil;

namespace {

struct TempTree {
  std::filesystem::path dir = make_temp_dir("chlab-scenario");
  ~TempTree() {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }

  std::filesystem::path config(const std::string& text,
                               const std::string& name = "config.json") {
    const auto p = dir / name;
    write_file(p, text);
    return p;
  }
};

scenario::Scenario load_text(TempTree& tree, const std::string& text) {
  return scenario::load_scenario(tree.config(text));
}

nlohmann::json read_json(const std::filesystem::path& p) {
  return nlohmann::json::parse(read_file(p));
}

const std::string kMinimalCircle = R"({
  "schema_version": 1,
  "domain": {"kind": "circle"},
  "grid": {"n": 64}
})";

}  // namespace

TEST_CASE("scenario: minimal config and defaults") {
  TempTree tree;
  const auto sc = load_text(tree, kMinimalCircle);
  CHECK(sc.grid.domain.is_circle());
  CHECK(sc.grid.n == 64);
  CHECK(sc.model.is_b_family());
  CHECK(sc.model.b() == 2.0);
  CHECK(sc.initial_type == "zero");
  CHECK(sc.solver.t_end == 1.0);
  CHECK_FALSE(sc.solver.dt.has_value());
  CHECK(sc.probe.eps == 1e-8);
  CHECK_FALSE(sc.peakon.has_value());
  CHECK(sc.output_dir == "out");
}

TEST_CASE("scenario: full config round trip") {
  TempTree tree;
  const auto sc = load_text(tree, R"({
    "schema_version": 1,
    "model": {"type": "b_family", "b": 3.0},
    "domain": {"kind": "line", "half_length": 20.0},
    "grid": {"n": 256},
    "initial": {"type": "peakon", "c": 1.5},
    "solver": {"t_end": 0.5, "dt": 0.01, "snapshot_every": 10,
               "decay_window": [5.0, 15.0], "fd_order": 2},
    "probe": {"eps": 1e-6, "min_width": 1.0},
    "output": {"directory": "results"}
  })");
  CHECK(sc.grid.domain.is_line());
  CHECK(sc.grid.domain.half_length == 20.0);
  CHECK(sc.model.b() == 3.0);
  CHECK(sc.initial_type == "peakon");
  CHECK(sc.solver.dt == 0.01);
  CHECK(sc.solver.snapshot_every == 10);
  CHECK(sc.solver.fd_order == 2);
  REQUIRE(sc.solver.decay_window.has_value());
  CHECK(sc.solver.decay_window->second == 15.0);
  CHECK(sc.probe.min_width == 1.0);
  CHECK(sc.output_dir == "results");

  const auto u0 = sc.initial(sc.grid);
  CHECK(fields::norm_sup(u0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("scenario: config rejection paths") {
  TempTree tree;
  auto rejects = [&](const std::string& text, const std::string& needle) {
    try {
      load_text(tree, text);
      FAIL_CHECK("expected ConfigError for: " << needle);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64}, "surprise": 1})",
          "surprise");
  rejects(R"({"schema_version": 2, "domain": {"kind": "circle"},
              "grid": {"n": 64}})",
          "schema_version");
  rejects(R"({"schema_version": 1, "grid": {"n": 64}})", "domain");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"}})", "grid");
  rejects(R"({"schema_version": 1, "domain": {"kind": "torus"},
              "grid": {"n": 64}})",
          "domain.kind");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle",
              "half_length": 5.0}, "grid": {"n": 64}})",
          "half_length");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64.5}})",
          "integer");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64},
              "model": {"type": "b_family", "b": 3.5}})",
          "b must lie");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64},
              "model": {"type": "general", "g": "u_ux",
                        "h": "u2_minus_ux2"}})",
          "positivity");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64},
              "model": {"type": "general", "g": "u_ux", "h": "warp"}})",
          "unknown flux");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64},
              "initial": {"type": "vortex"}})",
          "profile registry");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64},
              "initial": {"type": "gaussian", "width": -1.0,
                          "amplitude": 1.0}})",
          "width");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64},
              "initial": {"type": "cosine", "k": 0, "amplitude": 1.0}})",
          "initial.k");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64},
              "initial": {"type": "decay_profile", "theta": 0.5}})",
          "line");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64},
              "initial": {"type": "peakon", "c": 1.0}})",
          "line");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64}, "solver": {"cfl": 2.0}})",
          "cfl");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64}, "probe": {"min_width": 0.01}})",
          "min_width");
  rejects(R"({"schema_version": 1, "domain": {"kind": "line",
              "half_length": 10.0}, "grid": {"n": 64},
              "peakon": {"q": [0.0, 1.0], "p": [1.0]}})",
          "sizes differ");
  rejects(R"({"schema_version": 1, "domain": {"kind": "line",
              "half_length": 10.0}, "grid": {"n": 64},
              "peakon": {"q": [0.0], "p": [1.0], "compare_pde": true}})",
          "fixed solver.dt");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64},
              "peakon": {"q": [0.0], "p": [1.0], "compare_pde": true}})",
          "line");
  rejects(R"({"schema_version": 1, "domain": {"kind": "circle"},
              "grid": {"n": 64},
              "solver": {"decay_window": [1.0, 2.0]}})",
          "line");
  rejects("{not json", "parse");

  CHECK_THROWS_AS(scenario::load_scenario(tree.dir / "absent.json"),
                  ConfigError);
}

TEST_CASE("scenario: initial profile registry") {
  TempTree tree;
  SUBCASE("gaussian formula") {
    const auto sc = load_text(tree, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 10.0},
      "grid": {"n": 128},
      "initial": {"type": "gaussian", "center": 1.0, "width": 2.0,
                  "amplitude": 0.5}
    })");
    const auto u = sc.initial(sc.grid);
    const auto expect = Field<double>::sample(sc.grid, [](double x) {
      const double s = (x - 1.0) / 2.0;
      return 0.5 * std::exp(-s * s);
    });
    CHECK(fields::norm_sup(u - expect) == 0.0);
  }
  SUBCASE("decay profile formula") {
    const auto sc = load_text(tree, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 10.0},
      "grid": {"n": 128},
      "initial": {"type": "decay_profile", "theta": 0.6}
    })");
    const auto u = sc.initial(sc.grid);
    CHECK(u.values[64] == doctest::Approx(std::exp(-0.6)).epsilon(1e-12));
  }
  SUBCASE("multipeakon sampling") {
    const auto sc = load_text(tree, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 10.0},
      "grid": {"n": 128},
      "initial": {"type": "multipeakon", "q": [-2.0, 2.0], "p": [1.0, 0.5]}
    })");
    const auto u = sc.initial(sc.grid);
    const auto expect = Field<double>::sample(sc.grid, [](double x) {
      return std::exp(-std::abs(x + 2.0)) + 0.5 * std::exp(-std::abs(x - 2.0));
    });
    CHECK(fields::norm_sup(u - expect) < 1e-15);
  }
  SUBCASE("file profile resolves relative to the config") {
    const auto grid = Grid<double>::line(5.0, 64);
    std::mt19937_64 rng(5);
    const auto u = random_gaussians(grid, 2, rng);
    fields::write_csv(tree.dir / "start.csv", u);
    const auto sc = load_text(tree, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 5.0},
      "grid": {"n": 64},
      "initial": {"type": "file", "path": "start.csv"}
    })");
    CHECK((sc.initial(sc.grid).values == u.values).all());
  }
}

TEST_CASE("scenario: simulate writes the full artifact set") {
  TempTree tree;
  const auto sc = load_text(tree, R"({
    "schema_version": 1,
    "domain": {"kind": "circle"},
    "grid": {"n": 64},
    "initial": {"type": "cosine", "k": 1, "amplitude": 0.2},
    "solver": {"t_end": 0.1, "dt": 0.01, "snapshot_every": 5}
  })");
  const auto out = tree.dir / "out";
  std::ostringstream log;
  CHECK(scenario::run_simulate(sc, out, log) == scenario::kExitOk);

  CHECK(std::filesystem::exists(out / "snapshot_0.csv"));
  CHECK(std::filesystem::exists(out / "snapshot_2.csv"));
  CHECK(std::filesystem::exists(out / "snapshots.csv"));
  CHECK(std::filesystem::exists(out / "diagnostics.csv"));
  const auto summary = read_json(out / "run_summary.json");
  CHECK(summary.at("status") == "Completed");
  CHECK(summary.at("steps_taken") == 10);
  CHECK(summary.at("snapshot_count") == 3);
  CHECK(summary.at("energy_drift_rel").get<double>() < 1e-10);

  SUBCASE("re-running is byte-identical") {
    const auto out2 = tree.dir / "out2";
    std::ostringstream log2;
    CHECK(scenario::run_simulate(sc, out2, log2) == scenario::kExitOk);
    CHECK(read_file(out / "snapshot_2.csv") ==
          read_file(out2 / "snapshot_2.csv"));
    CHECK(read_file(out / "diagnostics.csv") ==
          read_file(out2 / "diagnostics.csv"));
    CHECK(read_file(out / "snapshots.csv") == read_file(out2 / "snapshots.csv"));
  }
}

TEST_CASE("scenario: simulate surfaces stop conditions in the exit code") {
  TempTree tree;
  std::ostringstream log;
  SUBCASE("steepening pair stops with the blow-up code") {
    const auto sc = load_text(tree, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 20.0},
      "grid": {"n": 1024},
      "initial": {"type": "multipeakon", "q": [-1.0, 1.0], "p": [1.0, -1.0]},
      "solver": {"t_end": 3.0, "blowup_threshold": 6.0}
    })");
    const auto out = tree.dir / "blow";
    CHECK(scenario::run_simulate(sc, out, log) == scenario::kExitStopped);
    CHECK(read_json(out / "run_summary.json").at("status") ==
          "BlowUpSuspected");
  }
  SUBCASE("overflowing state stops with the non-finite code") {
    const auto sc = load_text(tree, R"({
      "schema_version": 1,
      "domain": {"kind": "circle"},
      "grid": {"n": 64},
      "initial": {"type": "cosine", "k": 1, "amplitude": 0.5},
      "solver": {"t_end": 10000.0, "dt": 1000.0, "blowup_threshold": 1e300}
    })");
    const auto out = tree.dir / "nan";
    CHECK(scenario::run_simulate(sc, out, log) == scenario::kExitNonFinite);
    CHECK(read_json(out / "run_summary.json").at("status") == "NonFiniteState");
  }
  SUBCASE("boundary truncation is called out") {
    const auto sc = load_text(tree, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 5.0},
      "grid": {"n": 64},
      "initial": {"type": "gaussian", "center": 4.5, "width": 1.0,
                  "amplitude": 1.0},
      "solver": {"t_end": 0.0}
    })");
    std::ostringstream warn_log;
    scenario::run_simulate(sc, tree.dir / "warn", warn_log);
    CHECK(warn_log.str().find("warning") != std::string::npos);
  }
}

TEST_CASE("scenario: probe consumes simulate output") {
  TempTree tree;
  std::ostringstream log;
  SUBCASE("zero field yields one consistent record") {
    const auto sc = load_text(tree, R"({
      "schema_version": 1,
      "domain": {"kind": "circle"},
      "grid": {"n": 64},
      "solver": {"t_end": 0.0}
    })");
    const auto out = tree.dir / "zero";
    REQUIRE(scenario::run_simulate(sc, out, log) == scenario::kExitOk);
    CHECK(scenario::run_probe(sc, out, "", log) == scenario::kExitOk);
    const auto report = read_json(out / "probe_report.json");
    REQUIRE(report.at("records").size() == 1);
    const auto& rec = report.at("records").at(0);
    CHECK(rec.at("verdict") == "ConsistentWithZeroSolution");
    CHECK(rec.at("f_mass").get<double>() == 0.0);
    // The seam-straddling run is probed from one cell in.
    CHECK(rec.at("interval").at("a").get<double>() ==
          doctest::Approx(sc.grid.dx));
  }
  SUBCASE("peakon tails yield strict witnesses") {
    const auto sc = load_text(tree, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 40.0},
      "grid": {"n": 1024},
      "initial": {"type": "peakon", "c": 1.0},
      "solver": {"t_end": 0.0}
    })");
    const auto out = tree.dir / "peak";
    REQUIRE(scenario::run_simulate(sc, out, log) == scenario::kExitOk);
    CHECK(scenario::run_probe(sc, out, "0", log) == scenario::kExitOk);
    const auto report = read_json(out / "probe_report.json");
    REQUIRE(report.at("records").size() == 2);
    for (const auto& rec : report.at("records")) {
      CHECK(rec.at("verdict") == "StrictInequalityWitness");
      CHECK(rec.at("gap").get<double>() > 0.0);
      CHECK(rec.at("max_u_on_interval").get<double>() < 1e-7);
      // Discrete differentiation smears the crest kink, shaving ~1% off
      // the flux mass at this resolution.
      CHECK(rec.at("f_mass").get<double>() ==
            doctest::Approx(1.5).epsilon(1e-2));
    }
  }
  SUBCASE("selector forms") {
    const auto sc = load_text(tree, kMinimalCircle);
    const auto out = tree.dir / "sel";
    REQUIRE(scenario::run_simulate(sc, out, log) == scenario::kExitOk);
    CHECK(scenario::run_probe(sc, out, "0", log) == scenario::kExitOk);
    CHECK(scenario::run_probe(sc, out, "0.9", log) == scenario::kExitOk);
    CHECK_THROWS_AS(scenario::run_probe(sc, out, "57", log), ConfigError);
    CHECK_THROWS_AS(scenario::run_probe(sc, out, "banana", log), ConfigError);
    CHECK_THROWS_AS(
        scenario::run_probe(sc, out, "99999999999999999999999", log),
        ConfigError);
  }
  SUBCASE("probing before simulating is an error") {
    const auto sc = load_text(tree, kMinimalCircle);
    CHECK_THROWS_AS(scenario::run_probe(sc, tree.dir / "fresh", "", log),
                    ConfigError);
  }
}

TEST_CASE("scenario: peakon runner") {
  TempTree tree;
  std::ostringstream log;
  SUBCASE("single peakon travels and conserves its invariants") {
    const auto sc = load_text(tree, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 20.0},
      "grid": {"n": 64},
      "peakon": {"q": [0.0], "p": [1.0], "t_end": 1.0, "dt": 0.001,
                 "record_every": 100}
    })");
    const auto out = tree.dir / "single";
    CHECK(scenario::run_peakon(sc, out, log) == scenario::kExitOk);
    const auto traj = read_file(out / "peakon_trajectory.csv");
    CHECK(traj.rfind("t,q1,p1\n", 0) == 0);
    CHECK(std::count(traj.begin(), traj.end(), '\n') == 12);  // header + 11
    const auto summary = read_json(out / "run_summary.json");
    CHECK(summary.at("status") == "Completed");
    CHECK(summary.at("hamiltonian_drift_rel").get<double>() < 1e-12);
    CHECK(summary.at("momentum_drift_abs").get<double>() < 1e-12);
  }
  SUBCASE("collision stops the run with partial data") {
    const auto sc = load_text(tree, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 20.0},
      "grid": {"n": 64},
      "peakon": {"q": [-1.0, 1.0], "p": [1.0, -1.0], "t_end": 5.0,
                 "dt": 0.001}
    })");
    const auto out = tree.dir / "collide";
    CHECK(scenario::run_peakon(sc, out, log) == scenario::kExitStopped);
    const auto summary = read_json(out / "run_summary.json");
    CHECK(summary.at("status") == "CollisionStopped");
    CHECK(summary.at("t_final").get<double>() < 5.0);
    CHECK(std::filesystem::exists(out / "peakon_trajectory.csv"));
  }
  SUBCASE("ode and pde evolutions of one peakon agree") {
    const auto sc = load_text(tree, R"({
      "schema_version": 1,
      "domain": {"kind": "line", "half_length": 20.0},
      "grid": {"n": 2048},
      "solver": {"t_end": 0.5, "dt": 0.002, "snapshot_every": 125},
      "peakon": {"q": [0.0], "p": [1.0], "t_end": 0.5, "dt": 0.002,
                 "compare_pde": true}
    })");
    const auto out = tree.dir / "versus";
    CHECK(scenario::run_peakon(sc, out, log) == scenario::kExitOk);
    CHECK(std::filesystem::exists(out / "comparison.csv"));
    const auto summary = read_json(out / "run_summary.json");
    CHECK(summary.at("compare").at("pde_status") == "Completed");
    CHECK(summary.at("compare").at("max_rel_l2").get<double>() < 0.05);
  }
  SUBCASE("missing peakon section") {
    const auto sc = load_text(tree, kMinimalCircle);
    CHECK_THROWS_AS(scenario::run_peakon(sc, tree.dir / "none", log),
                    ConfigError);
  }
}

TEST_CASE("scenario: kernel check runner") {
  std::ostringstream log;
  CHECK(scenario::run_kernelcheck(5000, 3, log) == scenario::kExitOk);
  CHECK(log.str().find("min_margin_line") != std::string::npos);
  CHECK(log.str().find("floor_mismatches=0") != std::string::npos);
  CHECK_THROWS_AS(scenario::run_kernelcheck(0, 3, log), ConfigError);
}

TEST_CASE("scenario: snapshot comparison runner") {
  TempTree tree;
  std::ostringstream log;
  const auto grid = Grid<double>::line(5.0, 64);
  std::mt19937_64 rng(9);
  const auto u = random_gaussians(grid, 2, rng);
  const auto pa = tree.dir / "a.csv";
  const auto pb = tree.dir / "b.csv";
  fields::write_csv(pa, u);

  SUBCASE("identical files pass any tolerance") {
    fields::write_csv(pb, u);
    CHECK(scenario::run_compare(pa, pb, 1e-15, log) == scenario::kExitOk);
    CHECK(scenario::run_compare(pa, pb, std::nullopt, log) ==
          scenario::kExitOk);
  }
  SUBCASE("a perturbation beyond tolerance fails the check") {
    auto v = u;
    v.values[10] += 1e-3;
    fields::write_csv(pb, v);
    CHECK(scenario::run_compare(pa, pb, 1e-9, log) ==
          scenario::kExitCheckFailed);
    CHECK(scenario::run_compare(pa, pb, 1.0, log) == scenario::kExitOk);
    CHECK(scenario::run_compare(pa, pb, std::nullopt, log) ==
          scenario::kExitOk);  // report-only mode never fails
  }
  SUBCASE("structural mismatches are configuration errors") {
    const auto other = Grid<double>::line(5.0, 128);
    fields::write_csv(pb, Field<double>::zero(other));
    CHECK_THROWS_AS(scenario::run_compare(pa, pb, std::nullopt, log),
                    ConfigError);
    const auto shifted = Grid<double>::line(6.0, 64);
    fields::write_csv(pb, Field<double>::zero(shifted));
    CHECK_THROWS_AS(scenario::run_compare(pa, pb, std::nullopt, log),
                    ConfigError);
  }
}
