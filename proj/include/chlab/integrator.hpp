#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "chlab/diagnostics.hpp"
#include "chlab/model.hpp"

namespace chlab::integrator {

enum class RunStatus { Completed, BlowUpSuspected, NonFiniteState };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed:
      return "Completed";
    case RunStatus::BlowUpSuspected:
      return "BlowUpSuspected";
    case RunStatus::NonFiniteState:
      return "NonFiniteState";
  }
  return "NonFiniteState";
}

template <typename Scalar>
struct SolverConfig {
  Scalar t_end = 1;
  /// Fixed step when set; otherwise the advective CFL rule below.
  std::optional<Scalar> dt;
  Scalar cfl = Scalar(0.3);
  Scalar dt_max = Scalar(0.1);
  bool dealias = false;
  int fd_order = 4;
  /// 0 records only the initial and final snapshots.
  Index snapshot_every = 0;
  Scalar blowup_threshold = Scalar(1e6);
  /// When set (line only), each diagnostics row carries a decay-rate fit.
  std::optional<std::pair<Scalar, Scalar>> decay_window;

  void validate() const {
    if (!(t_end >= Scalar(0)) || !std::isfinite(double(t_end))) {
      throw std::invalid_argument("SolverConfig: t_end must be finite and >= 0");
    }
    if (dt) {
      if (!(*dt > Scalar(0))) {
        throw std::invalid_argument("SolverConfig: fixed dt must be > 0");
      }
    } else {
      if (!(cfl > Scalar(0) && cfl <= Scalar(1))) {
        throw std::invalid_argument("SolverConfig: cfl must lie in (0, 1]");
      }
      if (!(dt_max > Scalar(0))) {
        throw std::invalid_argument("SolverConfig: dt_max must be > 0");
      }
    }
    if (snapshot_every < 0) {
      throw std::invalid_argument("SolverConfig: snapshot_every must be >= 0");
    }
    if (!(blowup_threshold > Scalar(0))) {
      throw std::invalid_argument("SolverConfig: blowup_threshold must be > 0");
    }
    if (decay_window && !(decay_window->first < decay_window->second)) {
      throw std::invalid_argument("SolverConfig: decay window must be ordered");
    }
  }
};

template <typename Scalar>
struct DiagnosticsRow {
  Index step = 0;
  Scalar t = 0;
  Scalar energy = 0;
  Scalar max_slope = 0;
  Scalar sup_norm = 0;
  std::optional<Scalar> decay_theta;
};

template <typename Scalar>
struct Trajectory {
  std::vector<Scalar> times;
  std::vector<Index> snapshot_steps;
  std::vector<Field<Scalar>> snapshots;
  std::vector<DiagnosticsRow<Scalar>> diagnostics;
  RunStatus status = RunStatus::Completed;
  Index steps_taken = 0;
  Scalar t_final = 0;

  const Field<Scalar>& final_field() const { return snapshots.back(); }
};

/// One classical four-stage Runge-Kutta step of du/dt = rhs(u).
template <typename Scalar>
Field<Scalar> step_rk4(const model::ModelSpec<Scalar>& m, const Field<Scalar>& u,
                       Scalar dt, const model::RhsOptions& opt = {}) {
  if (!(dt > Scalar(0))) {
    throw std::invalid_argument("step_rk4: dt must be > 0");
  }
  const Scalar half = dt / Scalar(2);
  const Field<Scalar> k1 = model::rhs(m, u, opt);
  const Field<Scalar> k2 = model::rhs(m, u + half * k1, opt);
  const Field<Scalar> k3 = model::rhs(m, u + half * k2, opt);
  const Field<Scalar> k4 = model::rhs(m, u + dt * k3, opt);
  return Field<Scalar>(
      u.grid, u.values + dt / Scalar(6) *
                             (k1.values + Scalar(2) * k2.values +
                              Scalar(2) * k3.values + k4.values));
}

/// Advective CFL step: dt = min(dt_max, cfl * dx / max(sup|u|, 1e-12)).
template <typename Scalar>
Scalar select_dt(const Field<Scalar>& u, Scalar cfl, Scalar dt_max) {
  if (!(cfl > Scalar(0) && cfl <= Scalar(1))) {
    throw std::invalid_argument("select_dt: cfl must lie in (0, 1]");
  }
  if (!(dt_max > Scalar(0))) {
    throw std::invalid_argument("select_dt: dt_max must be > 0");
  }
  const Scalar speed = std::max(fields::norm_sup(u), Scalar(1e-12));
  return std::min(dt_max, cfl * u.grid.dx / speed);
}

namespace detail {

template <typename Scalar>
DiagnosticsRow<Scalar> make_row(const Field<Scalar>& u, Index step, Scalar t,
                                const SolverConfig<Scalar>& cfg) {
  DiagnosticsRow<Scalar> row;
  row.step = step;
  row.t = t;
  row.energy = diagnostics::energy(u, cfg.fd_order);
  row.max_slope = diagnostics::max_slope(u, cfg.fd_order);
  row.sup_norm = fields::norm_sup(u);
  if (cfg.decay_window) {
    try {
      row.decay_theta =
          diagnostics::decay_rate(u, cfg.decay_window->first,
                                  cfg.decay_window->second)
              .theta;
    } catch (const DegenerateWindow&) {
      row.decay_theta.reset();
    }
  }
  return row;
}

}  // namespace detail

/// Advances u0 to t_end, recording snapshots and per-step diagnostics.
/// Stops early with BlowUpSuspected when the discrete sup of |du/dx| crosses
/// the threshold, or with NonFiniteState when a step leaves finite range; the
/// partial trajectory up to the last valid state is returned either way.
template <typename Scalar>
Trajectory<Scalar> run(const model::ModelSpec<Scalar>& m, const Field<Scalar>& u0,
                       const SolverConfig<Scalar>& cfg) {
  cfg.validate();
  if (cfg.decay_window && !u0.grid.domain.is_line()) {
    throw DomainError("run: decay_window requires a line domain");
  }
  const model::RhsOptions rhs_opt{cfg.dealias, cfg.fd_order};

  Trajectory<Scalar> traj;
  auto record = [&traj](const Field<Scalar>& u, Scalar t, Index step) {
    if (!traj.snapshot_steps.empty() && traj.snapshot_steps.back() == step) {
      return;
    }
    traj.times.push_back(t);
    traj.snapshot_steps.push_back(step);
    traj.snapshots.push_back(u);
  };

  Field<Scalar> u = u0;
  Scalar t = 0;
  Index step = 0;
  traj.diagnostics.push_back(detail::make_row(u, step, t, cfg));
  record(u, t, step);
  if (traj.diagnostics.back().max_slope > cfg.blowup_threshold) {
    traj.status = RunStatus::BlowUpSuspected;
    return traj;
  }

  const Scalar t_eps = Scalar(1e-12) * std::max(Scalar(1), cfg.t_end);
  while (cfg.t_end - t > t_eps) {
    Scalar dt = cfg.dt ? *cfg.dt : select_dt(u, cfg.cfl, cfg.dt_max);
    dt = std::min(dt, cfg.t_end - t);
    try {
      u = step_rk4(m, u, dt, rhs_opt);
    } catch (const NonFiniteState&) {
      traj.status = RunStatus::NonFiniteState;
      break;
    }
    t += dt;
    ++step;
    traj.diagnostics.push_back(detail::make_row(u, step, t, cfg));
    if (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) {
      record(u, t, step);
    }
    if (traj.diagnostics.back().max_slope > cfg.blowup_threshold) {
      traj.status = RunStatus::BlowUpSuspected;
      break;
    }
  }

  // Final snapshot: the last valid state, whatever stopped the loop.
  record(u, t, step);
  traj.steps_taken = step;
  traj.t_final = t;
  return traj;
}

}  // namespace chlab::integrator
