#include "chlab/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace chlab::scenario {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using fields::detail::format_value;

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw ConfigError("scenario: " + msg);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const auto k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(where + ": unknown key '" + it.key() + "'");
  }
}

const json& require_key(const json& obj, const std::string& where,
                        const std::string& key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where + ": missing key '" + key + "'");
  return *it;
}

double get_number(const json& obj, const std::string& where,
                  const std::string& key) {
  const json& v = require_key(obj, where, key);
  if (!v.is_number()) fail(where + "." + key + " must be a number");
  return v.get<double>();
}

double get_number_or(const json& obj, const std::string& where,
                     const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  return get_number(obj, where, key);
}

std::int64_t get_integer(const json& obj, const std::string& where,
                         const std::string& key) {
  const json& v = require_key(obj, where, key);
  if (!v.is_number_integer()) fail(where + "." + key + " must be an integer");
  return v.get<std::int64_t>();
}

std::int64_t get_integer_or(const json& obj, const std::string& where,
                            const std::string& key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  return get_integer(obj, where, key);
}

bool get_bool_or(const json& obj, const std::string& where,
                 const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(where + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& where,
                       const std::string& key) {
  const json& v = require_key(obj, where, key);
  if (!v.is_string()) fail(where + "." + key + " must be a string");
  return v.get<std::string>();
}

std::vector<double> get_number_list(const json& obj, const std::string& where,
                                    const std::string& key) {
  const json& v = require_key(obj, where, key);
  if (!v.is_array()) fail(where + "." + key + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(where + "." + key + " must contain numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

model::ModelSpec<double> parse_model(const json& m) {
  const std::string type = get_string(m, "model", "type");
  if (type == "b_family") {
    check_keys(m, "model", {"type", "b"});
    const double b = get_number(m, "model", "b");
    try {
      return model::ModelSpec<double>::b_family(b);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  if (type == "general") {
    check_keys(m, "model", {"type", "g", "h", "audit_samples", "audit_seed"});
    const std::string g_name = get_string(m, "model", "g");
    const std::string h_name = get_string(m, "model", "h");
    const int samples =
        static_cast<int>(get_integer_or(m, "model", "audit_samples", 512));
    const auto seed =
        static_cast<std::uint64_t>(get_integer_or(m, "model", "audit_seed", 0));

    model::PointFn<double> g;
    if (g_name == "u_ux") {
      g = [](double u, double ux) { return u * ux; };
    } else if (g_name == "u2_ux") {
      g = [](double u, double ux) { return u * u * ux; };
    } else if (g_name == "zero") {
      g = [](double, double) { return 0.0; };
    } else {
      fail("model.g: unknown advection '" + g_name + "'");
    }

    model::PointFn<double> h;
    auto dep = model::HDependence::Both;
    if (h_name == "ch_flux") {
      h = [](double u, double ux) { return u * u + 0.5 * ux * ux; };
    } else if (h_name == "dp_flux") {
      h = [](double u, double) { return 1.5 * u * u; };
      dep = model::HDependence::UOnly;
    } else if (h_name == "sum_of_squares") {
      h = [](double u, double ux) { return u * u + ux * ux; };
    } else if (h_name == "u_squared") {
      h = [](double u, double) { return u * u; };
      dep = model::HDependence::UOnly;
    } else if (h_name == "u2_minus_ux2") {
      // Deliberately sign-indefinite; the construction audit rejects it.
      h = [](double u, double ux) { return u * u - ux * ux; };
    } else {
      fail("model.h: unknown flux '" + h_name + "'");
    }
    try {
      return model::ModelSpec<double>::general(g_name, std::move(g), h_name,
                                               std::move(h), dep, samples,
                                               seed);
    } catch (const PositivityViolation& e) {
      fail(std::string("model.h failed the positivity audit: ") + e.what());
    }
  }
  fail("model.type must be 'b_family' or 'general'");
}

Grid<double> parse_grid(const json& doc) {
  const json& dom = require_key(doc, "scenario", "domain");
  check_keys(dom, "domain", {"kind", "half_length"});
  const std::string kind = get_string(dom, "domain", "kind");
  const json& grid = require_key(doc, "scenario", "grid");
  check_keys(grid, "grid", {"n"});
  const auto n = static_cast<Index>(get_integer(grid, "grid", "n"));
  try {
    if (kind == "line") {
      return Grid<double>::line(get_number(dom, "domain", "half_length"), n);
    }
    if (kind == "circle") {
      if (dom.contains("half_length")) {
        fail("domain.half_length applies to line domains only");
      }
      return Grid<double>::circle(n);
    }
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  fail("domain.kind must be 'line' or 'circle'");
}

std::pair<std::string, std::function<Field<double>(const Grid<double>&)>>
parse_initial(const json& ic, const Grid<double>& grid,
              const fs::path& config_dir) {
  const std::string type = get_string(ic, "initial", "type");
  const bool line = grid.domain.is_line();
  if (type == "zero") {
    check_keys(ic, "initial", {"type"});
    return {type, [](const Grid<double>& g) { return Field<double>::zero(g); }};
  }
  if (type == "peakon") {
    check_keys(ic, "initial", {"type", "c"});
    if (!line) fail("initial.peakon requires a line domain");
    const double c = get_number(ic, "initial", "c");
    if (!(c > 0)) fail("initial.c must be > 0");
    return {type, [c](const Grid<double>& g) {
              return Field<double>::sample(g, [c](double x) {
                return peakons::single_peakon(c, x, 0.0);
              });
            }};
  }
  if (type == "multipeakon") {
    check_keys(ic, "initial", {"type", "q", "p"});
    if (!line) fail("initial.multipeakon requires a line domain");
    const auto q = get_number_list(ic, "initial", "q");
    const auto p = get_number_list(ic, "initial", "p");
    if (q.size() != p.size()) fail("initial.q and initial.p sizes differ");
    if (q.empty()) fail("initial.multipeakon needs at least one peakon");
    return {type, [q, p](const Grid<double>& g) {
              peakons::PeakonState<double> s(
                  Eigen::Map<const Array<double>>(q.data(), Index(q.size())),
                  Eigen::Map<const Array<double>>(p.data(), Index(p.size())));
              return peakons::multipeakon_field(s, g);
            }};
  }
  if (type == "gaussian") {
    check_keys(ic, "initial", {"type", "center", "width", "amplitude"});
    const double c = get_number_or(ic, "initial", "center", 0.0);
    const double w = get_number(ic, "initial", "width");
    const double a = get_number(ic, "initial", "amplitude");
    if (!(w > 0)) fail("initial.width must be > 0");
    return {type, [c, w, a](const Grid<double>& g) {
              return Field<double>::sample(g, [c, w, a](double x) {
                const double s = (x - c) / w;
                return a * std::exp(-s * s);
              });
            }};
  }
  if (type == "cosine") {
    check_keys(ic, "initial", {"type", "k", "amplitude"});
    const auto k = get_integer(ic, "initial", "k");
    const double a = get_number(ic, "initial", "amplitude");
    if (k < 1) fail("initial.k must be a positive integer");
    return {type, [k, a](const Grid<double>& g) {
              return Field<double>::sample(g, [k, a](double x) {
                return a * std::cos(2.0 * std::numbers::pi * double(k) * x);
              });
            }};
  }
  if (type == "decay_profile") {
    check_keys(ic, "initial", {"type", "theta"});
    if (!line) fail("initial.decay_profile requires a line domain");
    const double theta = get_number(ic, "initial", "theta");
    if (!(theta > 0)) fail("initial.theta must be > 0");
    return {type, [theta](const Grid<double>& g) {
              return Field<double>::sample(g, [theta](double x) {
                return std::exp(-theta * std::sqrt(1.0 + x * x));
              });
            }};
  }
  if (type == "file") {
    check_keys(ic, "initial", {"type", "path"});
    fs::path p = get_string(ic, "initial", "path");
    if (p.is_relative()) p = config_dir / p;
    return {type, [p](const Grid<double>& g) { return fields::read_csv(p, g); }};
  }
  fail("initial.type '" + type + "' is not in the profile registry");
}

integrator::SolverConfig<double> parse_solver(const json& s) {
  check_keys(s, "solver",
             {"t_end", "dt", "cfl", "dt_max", "dealias", "fd_order",
              "snapshot_every", "blowup_threshold", "decay_window"});
  integrator::SolverConfig<double> cfg;
  cfg.t_end = get_number_or(s, "solver", "t_end", 1.0);
  if (s.contains("dt") && !s.at("dt").is_null()) {
    cfg.dt = get_number(s, "solver", "dt");
  }
  cfg.cfl = get_number_or(s, "solver", "cfl", 0.3);
  cfg.dt_max = get_number_or(s, "solver", "dt_max", 0.1);
  cfg.dealias = get_bool_or(s, "solver", "dealias", false);
  cfg.fd_order = static_cast<int>(get_integer_or(s, "solver", "fd_order", 4));
  cfg.snapshot_every =
      static_cast<Index>(get_integer_or(s, "solver", "snapshot_every", 0));
  cfg.blowup_threshold = get_number_or(s, "solver", "blowup_threshold", 1e6);
  if (s.contains("decay_window")) {
    const json& w = s.at("decay_window");
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() ||
        !w[1].is_number()) {
      fail("solver.decay_window must be [x0, x1]");
    }
    cfg.decay_window = {w[0].get<double>(), w[1].get<double>()};
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  return cfg;
}

ProbeSettings parse_probe(const json& p) {
  check_keys(p, "probe", {"eps", "min_width", "mass_tol", "ineq_tol"});
  ProbeSettings out;
  out.eps = get_number_or(p, "probe", "eps", 1e-8);
  if (!(out.eps > 0)) fail("probe.eps must be > 0");
  if (p.contains("min_width")) {
    out.min_width = get_number(p, "probe", "min_width");
  }
  if (p.contains("mass_tol")) out.mass_tol = get_number(p, "probe", "mass_tol");
  if (p.contains("ineq_tol")) out.ineq_tol = get_number(p, "probe", "ineq_tol");
  return out;
}

PeakonSettings parse_peakon(const json& p) {
  check_keys(p, "peakon",
             {"q", "p", "t_end", "dt", "record_every", "compare_pde"});
  PeakonSettings out;
  out.q = get_number_list(p, "peakon", "q");
  out.p = get_number_list(p, "peakon", "p");
  if (out.q.size() != out.p.size()) fail("peakon.q and peakon.p sizes differ");
  if (out.q.empty()) fail("peakon.q must list at least one peakon");
  out.t_end = get_number_or(p, "peakon", "t_end", 1.0);
  out.dt = get_number_or(p, "peakon", "dt", 1e-3);
  out.record_every =
      static_cast<Index>(get_integer_or(p, "peakon", "record_every", 1));
  out.compare_pde = get_bool_or(p, "peakon", "compare_pde", false);
  if (!(out.t_end >= 0)) fail("peakon.t_end must be >= 0");
  if (!(out.dt > 0)) fail("peakon.dt must be > 0");
  if (out.record_every < 1) fail("peakon.record_every must be >= 1");
  return out;
}

peakons::PeakonState<double> make_state(const PeakonSettings& ps) {
  return peakons::PeakonState<double>(
      Eigen::Map<const Array<double>>(ps.q.data(), Index(ps.q.size())),
      Eigen::Map<const Array<double>>(ps.p.data(), Index(ps.p.size())));
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

void write_json(const fs::path& path, const json& doc) {
  auto os = open_out(path);
  os << doc.dump(2) << '\n';
}

struct ManifestRow {
  Index index = 0;
  Index step = 0;
  double t = 0;
  std::string file;
};

std::vector<ManifestRow> read_manifest(const fs::path& out_dir) {
  const fs::path path = out_dir / "snapshots.csv";
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("probe: no snapshot manifest at '" + path.string() +
                      "' (run simulate first)");
  }
  std::string line;
  if (!std::getline(is, line) ||
      (line != "index,step,t,file" && line != "index,step,t,file\r")) {
    throw ConfigError("probe: malformed manifest header in '" + path.string() +
                      "'");
  }
  std::vector<ManifestRow> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    ManifestRow row;
    try {
      std::getline(ss, cell, ',');
      row.index = std::stoll(cell);
      std::getline(ss, cell, ',');
      row.step = std::stoll(cell);
      std::getline(ss, cell, ',');
      row.t = std::stod(cell);
      std::getline(ss, row.file);
    } catch (const std::exception&) {
      throw ConfigError("probe: malformed manifest row '" + line + "'");
    }
    if (row.file.empty()) {
      throw ConfigError("probe: malformed manifest row '" + line + "'");
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<ManifestRow> select_snapshots(const std::vector<ManifestRow>& rows,
                                          const std::string& selector) {
  if (selector.empty()) return rows;
  const bool integral =
      selector.find_first_not_of("0123456789") == std::string::npos;
  if (integral) {
    Index want = -1;
    try {
      want = std::stoll(selector);
    } catch (const std::exception&) {
      throw ConfigError("probe: snapshot index '" + selector +
                        "' is out of range");
    }
    for (const auto& r : rows) {
      if (r.index == want) return {r};
    }
    throw ConfigError("probe: snapshot index " + selector +
                      " not present in the manifest");
  }
  double t = 0;
  try {
    std::size_t used = 0;
    t = std::stod(selector, &used);
    if (used != selector.size()) throw std::invalid_argument(selector);
  } catch (const std::exception&) {
    throw ConfigError("probe: snapshot selector '" + selector +
                      "' is neither an index nor a time");
  }
  if (rows.empty()) throw ConfigError("probe: manifest lists no snapshots");
  const ManifestRow* best = &rows.front();
  for (const auto& r : rows) {
    if (std::abs(r.t - t) < std::abs(best->t - t)) best = &r;
  }
  return {*best};
}

json report_to_json(const diagnostics::ProbeReport<double>& r,
                    Index snapshot_index, Index step) {
  json rec;
  rec["snapshot_index"] = snapshot_index;
  rec["step"] = step;
  rec["t_star"] = r.t_star;
  rec["interval"] = {{"a", r.interval.a}, {"b", r.interval.b}};
  rec["F_a"] = r.F_a;
  rec["F_b"] = r.F_b;
  rec["gap"] = r.gap();
  rec["F_a_grid"] = r.F_a_grid;
  rec["F_b_grid"] = r.F_b_grid;
  rec["f_mass"] = r.f_mass;
  rec["mass_tol"] = r.mass_tol;
  rec["ineq_tol"] = r.ineq_tol;
  rec["max_u_on_interval"] = r.max_u_on_interval;
  rec["verdict"] = diagnostics::to_string(r.verdict);
  return rec;
}

}  // namespace

Scenario load_scenario(const fs::path& config_path) {
  std::ifstream is(config_path);
  if (!is) {
    throw ConfigError("cannot open scenario file '" + config_path.string() +
                      "'");
  }
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario parse: ") + e.what());
  }
  check_keys(doc, "scenario",
             {"schema_version", "model", "domain", "grid", "initial", "solver",
              "probe", "peakon", "output"});
  if (get_integer(doc, "scenario", "schema_version") != 1) {
    fail("schema_version must be 1");
  }

  Scenario sc;
  sc.grid = parse_grid(doc);
  if (doc.contains("model")) sc.model = parse_model(doc.at("model"));
  if (doc.contains("initial")) {
    std::tie(sc.initial_type, sc.initial) = parse_initial(
        doc.at("initial"), sc.grid, config_path.parent_path());
  } else {
    sc.initial_type = "zero";
    sc.initial = [](const Grid<double>& g) { return Field<double>::zero(g); };
  }
  if (doc.contains("solver")) sc.solver = parse_solver(doc.at("solver"));
  if (doc.contains("probe")) sc.probe = parse_probe(doc.at("probe"));
  if (doc.contains("peakon")) sc.peakon = parse_peakon(doc.at("peakon"));
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    check_keys(o, "output", {"directory"});
    sc.output_dir = get_string(o, "output", "directory");
  }

  if (sc.probe.min_width && !(*sc.probe.min_width >= 4.0 * sc.grid.dx)) {
    fail("probe.min_width must be >= 4*dx");
  }
  if (sc.peakon && sc.peakon->compare_pde) {
    if (!sc.grid.domain.is_line()) {
      fail("peakon.compare_pde requires a line domain");
    }
    if (!sc.solver.dt) {
      fail("peakon.compare_pde requires a fixed solver.dt");
    }
  }
  if (sc.solver.decay_window && !sc.grid.domain.is_line()) {
    fail("solver.decay_window requires a line domain");
  }
  return sc;
}

int run_simulate(const Scenario& sc, const fs::path& out_dir,
                 std::ostream& log) {
  fs::create_directories(out_dir);
  const Field<double> u0 = sc.initial(sc.grid);
  if (sc.grid.domain.is_line()) {
    const double sup = fields::norm_sup(u0);
    const double edge = std::max(std::abs(u0.values[0]),
                                 std::abs(u0.values[u0.size() - 1]));
    if (sup > 0 && edge > 1e-8 * sup) {
      log << "warning: initial data does not vanish at the line boundary "
             "(|u0| = "
          << edge << " at |x| = " << sc.grid.domain.half_length
          << "); the evolution treats the field as zero outside\n";
    }
  }

  const auto traj = integrator::run(sc.model, u0, sc.solver);

  std::vector<std::string> files;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    files.push_back("snapshot_" + std::to_string(i) + ".csv");
    fields::write_csv(out_dir / files.back(), traj.snapshots[i]);
  }
  {
    auto ms = open_out(out_dir / "snapshots.csv");
    ms << "index,step,t,file\n";
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
      ms << i << ',' << traj.snapshot_steps[i] << ','
         << format_value(traj.times[i]) << ',' << files[i] << '\n';
    }
  }
  {
    auto ds = open_out(out_dir / "diagnostics.csv");
    ds << "t,energy,max_slope,sup_norm";
    if (sc.solver.decay_window) ds << ",decay_rate";
    ds << '\n';
    for (const auto& row : traj.diagnostics) {
      ds << format_value(row.t) << ',' << format_value(row.energy) << ','
         << format_value(row.max_slope) << ',' << format_value(row.sup_norm);
      if (sc.solver.decay_window) {
        ds << ',' << (row.decay_theta ? format_value(*row.decay_theta) : "nan");
      }
      ds << '\n';
    }
  }

  const double e0 = traj.diagnostics.front().energy;
  const double ef = traj.diagnostics.back().energy;
  json summary;
  summary["schema_version"] = 1;
  summary["command"] = "simulate";
  summary["status"] = integrator::to_string(traj.status);
  summary["steps_taken"] = traj.steps_taken;
  summary["t_final"] = traj.t_final;
  summary["snapshot_count"] = traj.snapshots.size();
  summary["energy_initial"] = e0;
  summary["energy_final"] = ef;
  summary["energy_drift_rel"] = std::abs(ef - e0) / std::max(std::abs(e0), 1e-300);
  summary["sup_norm_final"] = traj.diagnostics.back().sup_norm;
  summary["max_slope_final"] = traj.diagnostics.back().max_slope;
  write_json(out_dir / "run_summary.json", summary);

  log << "simulate: status=" << integrator::to_string(traj.status)
      << " steps=" << traj.steps_taken << " t_final=" << traj.t_final
      << " snapshots=" << traj.snapshots.size() << '\n';
  switch (traj.status) {
    case integrator::RunStatus::Completed:
      return kExitOk;
    case integrator::RunStatus::BlowUpSuspected:
      return kExitStopped;
    case integrator::RunStatus::NonFiniteState:
      return kExitNonFinite;
  }
  return kExitInternal;
}

int run_probe(const Scenario& sc, const fs::path& out_dir,
              const std::string& snapshot_selector, std::ostream& log) {
  const auto manifest = read_manifest(out_dir);
  const auto selected = select_snapshots(manifest, snapshot_selector);
  const double min_width = sc.probe.min_width.value_or(4.0 * sc.grid.dx);

  diagnostics::ProbeOptions<double> opt;
  opt.mass_tol = sc.probe.mass_tol;
  if (sc.probe.ineq_tol) opt.ineq_tol = *sc.probe.ineq_tol;
  opt.fd_order = sc.solver.fd_order;

  json records = json::array();
  for (const auto& row : selected) {
    const Field<double> u = fields::read_csv(out_dir / row.file, sc.grid);
    const auto intervals = diagnostics::find_vanishing_intervals(
        u, sc.probe.eps, min_width, sc.solver.fd_order);
    for (const auto& iv : intervals) {
      double a = iv.a, b = iv.b;
      // The circle probe needs interior endpoints; a run starting at the
      // seam is probed from one cell in.
      if (sc.grid.domain.is_circle() && a <= 0.0) a = sc.grid.dx;
      opt.t_star = row.t;
      const auto rep = diagnostics::uc_probe(sc.model, u, a, b, opt);
      records.push_back(report_to_json(rep, row.index, row.step));
      log << "probe: snapshot " << row.index << " t=" << row.t << " ["
          << a << ", " << b << "] verdict="
          << diagnostics::to_string(rep.verdict) << " gap=" << rep.gap()
          << " f_mass=" << rep.f_mass << '\n';
    }
    if (intervals.empty()) {
      log << "probe: snapshot " << row.index << " t=" << row.t
          << " no vanishing interval\n";
    }
  }

  json report;
  report["schema_version"] = 1;
  report["command"] = "probe";
  report["eps"] = sc.probe.eps;
  report["min_width"] = min_width;
  report["snapshots_probed"] = selected.size();
  report["records"] = records;
  write_json(out_dir / "probe_report.json", report);
  log << "probe: " << records.size() << " interval(s) across "
      << selected.size() << " snapshot(s)\n";
  return kExitOk;
}

int run_peakon(const Scenario& sc, const fs::path& out_dir, std::ostream& log) {
  if (!sc.peakon) throw ConfigError("scenario: peakon section missing");
  const PeakonSettings& ps = *sc.peakon;
  fs::create_directories(out_dir);

  const auto initial = make_state(ps);
  std::vector<std::pair<double, peakons::PeakonState<double>>> rows;
  Index calls = 0;
  double last_t = 0;
  peakons::PeakonState<double> last = initial;
  bool collided = false;
  std::string collision_what;
  try {
    peakons::evolve_peakons<double>(
        initial, ps.t_end, ps.dt,
        [&](double t, const peakons::PeakonState<double>& s) {
          if (calls % ps.record_every == 0) rows.emplace_back(t, s);
          last_t = t;
          last = s;
          ++calls;
        });
  } catch (const CollisionError& e) {
    collided = true;
    collision_what = e.what();
  }
  if (rows.empty() || rows.back().first != last_t) rows.emplace_back(last_t, last);

  {
    auto ts = open_out(out_dir / "peakon_trajectory.csv");
    ts << 't';
    for (Index i = 0; i < initial.size(); ++i) {
      ts << ",q" << (i + 1) << ",p" << (i + 1);
    }
    ts << '\n';
    for (const auto& [t, s] : rows) {
      ts << format_value(t);
      for (Index i = 0; i < s.size(); ++i) {
        ts << ',' << format_value(s.q[i]) << ',' << format_value(s.p[i]);
      }
      ts << '\n';
    }
  }

  const double h0 = peakons::hamiltonian(initial);
  const double hf = peakons::hamiltonian(last);
  const double m0 = peakons::total_momentum(initial);
  const double mf = peakons::total_momentum(last);
  json summary;
  summary["schema_version"] = 1;
  summary["command"] = "peakon";
  summary["status"] = collided ? "CollisionStopped" : "Completed";
  if (collided) summary["collision"] = collision_what;
  summary["peakon_count"] = initial.size();
  summary["rows"] = rows.size();
  summary["t_final"] = last_t;
  summary["hamiltonian_initial"] = h0;
  summary["hamiltonian_final"] = hf;
  summary["hamiltonian_drift_rel"] =
      std::abs(hf - h0) / std::max(std::abs(h0), 1e-300);
  summary["momentum_initial"] = m0;
  summary["momentum_final"] = mf;
  summary["momentum_drift_abs"] = std::abs(mf - m0);

  int exit_code = collided ? kExitStopped : kExitOk;

  if (ps.compare_pde && !collided) {
    const Field<double> u0 = peakons::multipeakon_field(initial, sc.grid);
    auto solver = sc.solver;
    solver.t_end = ps.t_end;
    const auto traj = integrator::run(sc.model, u0, solver);

    // Re-run the ODE at the PDE's own step size and capture the states at
    // the recorded snapshot steps.
    std::set<Index> want(traj.snapshot_steps.begin(),
                         traj.snapshot_steps.end());
    std::vector<peakons::PeakonState<double>> at_snapshots;
    Index k = 0;
    peakons::evolve_peakons<double>(
        initial, traj.t_final, *solver.dt,
        [&](double, const peakons::PeakonState<double>& s) {
          if (want.count(k)) at_snapshots.push_back(s);
          ++k;
        });

    auto cs = open_out(out_dir / "comparison.csv");
    cs << "t,l2_abs,l2_rel\n";
    double max_rel = 0;
    const std::size_t count =
        std::min(at_snapshots.size(), traj.snapshots.size());
    for (std::size_t i = 0; i < count; ++i) {
      const Field<double> w =
          peakons::multipeakon_field(at_snapshots[i], sc.grid);
      const double l2 = fields::norm_l2(traj.snapshots[i] - w);
      const double rel = l2 / std::max(fields::norm_l2(w), 1e-300);
      max_rel = std::max(max_rel, rel);
      cs << format_value(traj.times[i]) << ',' << format_value(l2) << ','
         << format_value(rel) << '\n';
    }
    json cmp;
    cmp["pde_status"] = integrator::to_string(traj.status);
    cmp["times_compared"] = count;
    cmp["max_rel_l2"] = max_rel;
    summary["compare"] = cmp;
    log << "peakon: compared " << count << " snapshot(s), max rel L2 "
        << max_rel << '\n';
    if (traj.status == integrator::RunStatus::BlowUpSuspected) {
      exit_code = kExitStopped;
    } else if (traj.status == integrator::RunStatus::NonFiniteState) {
      exit_code = kExitNonFinite;
    }
  }

  write_json(out_dir / "run_summary.json", summary);
  log << "peakon: status=" << (collided ? "CollisionStopped" : "Completed")
      << " rows=" << rows.size() << " t_final=" << last_t << '\n';
  return exit_code;
}

int run_kernelcheck(std::uint64_t trials, std::uint64_t seed,
                    std::ostream& log) {
  if (trials < 1) throw ConfigError("kernelcheck: trials must be >= 1");
  const auto r = kernels::inequality_check(trials, seed);
  log << "kernelcheck: trials=" << r.trials
      << " min_margin_line=" << format_value(r.min_margin_line)
      << " min_margin_circle=" << format_value(r.min_margin_circle)
      << " floor_mismatches=" << r.floor_mismatches << '\n';
  if (!r.passed()) {
    log << "kernelcheck: FAILED\n";
    return kExitCheckFailed;
  }
  log << "kernelcheck: all inequalities held\n";
  return kExitOk;
}

int run_compare(const fs::path& a, const fs::path& b, std::optional<double> tol,
                std::ostream& log) {
  const auto ca = fields::read_csv_columns(a);
  const auto cb = fields::read_csv_columns(b);
  if (ca.x.size() != cb.x.size()) {
    throw ConfigError("compare: row counts differ (" +
                      std::to_string(ca.x.size()) + " vs " +
                      std::to_string(cb.x.size()) + ")");
  }
  if (ca.x.empty()) throw ConfigError("compare: empty snapshot files");
  double sup = 0, ss = 0, ssb = 0;
  for (std::size_t i = 0; i < ca.x.size(); ++i) {
    if (std::abs(ca.x[i] - cb.x[i]) > 1e-9) {
      throw ConfigError("compare: x columns differ at row " +
                        std::to_string(i));
    }
    const double d = ca.u[i] - cb.u[i];
    sup = std::max(sup, std::abs(d));
    ss += d * d;
    ssb += cb.u[i] * cb.u[i];
  }
  const double l2 = std::sqrt(ss);
  const double rel = l2 / std::max(std::sqrt(ssb), 1e-300);
  log << "compare: sup=" << format_value(sup) << " l2=" << format_value(l2)
      << " rel_l2=" << format_value(rel) << '\n';
  if (tol && !(rel <= *tol)) {
    log << "compare: relative L2 difference exceeds tolerance "
        << format_value(*tol) << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

}  // namespace chlab::scenario
