#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "chlab/field.hpp"
#include "chlab/kernels.hpp"

namespace chlab::peakons {

/// Minimum admissible gap between neighbouring peakon positions.
inline constexpr double kCollisionGapTol = 1e-6;

/// The exact peaked travelling wave c * e^{-|x - c t|}.
template <typename Scalar>
Scalar single_peakon(Scalar c, Scalar x, Scalar t) {
  if (!(c > Scalar(0))) {
    throw std::invalid_argument("single_peakon: speed c must be > 0");
  }
  return c * std::exp(-std::abs(x - c * t));
}

template <typename Scalar>
struct PeakonState {
  Array<Scalar> q;  // positions, strictly increasing while valid
  Array<Scalar> p;  // momenta

  PeakonState() = default;
  PeakonState(Array<Scalar> q_in, Array<Scalar> p_in)
      : q(std::move(q_in)), p(std::move(p_in)) {
    if (q.size() != p.size()) {
      throw std::invalid_argument(
          "PeakonState: position and momentum counts differ");
    }
    if (q.size() > 0 && (!q.allFinite() || !p.allFinite())) {
      throw NonFiniteState("PeakonState: non-finite entry");
    }
  }

  Index size() const { return q.size(); }
};

template <typename Scalar>
struct PeakonDeriv {
  Array<Scalar> qdot;
  Array<Scalar> pdot;
};

namespace detail {

template <typename Scalar>
void check_gaps(const PeakonState<Scalar>& s, Scalar gap_tol) {
  for (Index i = 0; i + 1 < s.size(); ++i) {
    const Scalar gap = s.q[i + 1] - s.q[i];
    if (gap < gap_tol) {
      throw CollisionError("peakon gap " + std::to_string(double(gap)) +
                           " between positions " + std::to_string(i) + " and " +
                           std::to_string(i + 1) + " fell below tolerance " +
                           std::to_string(double(gap_tol)));
    }
  }
}

}  // namespace detail

/// Samples u(x) = sum_i p_i e^{-|x - q_i|} on a line grid.
template <typename Scalar>
Field<Scalar> multipeakon_field(const PeakonState<Scalar>& s,
                                const Grid<Scalar>& grid) {
  if (!grid.domain.is_line()) {
    throw DomainError("multipeakon_field: peakon superpositions live on the line");
  }
  Array<Scalar> u = Array<Scalar>::Zero(grid.size());
  for (Index j = 0; j < grid.size(); ++j) {
    const Scalar x = grid.point(j);
    Scalar acc = 0;
    for (Index i = 0; i < s.size(); ++i) {
      acc += s.p[i] * std::exp(-std::abs(x - s.q[i]));
    }
    u[j] = acc;
  }
  return Field<Scalar>(grid, std::move(u));
}

/// Canonical peakon ODEs:
///   dq_i/dt = sum_j p_j e^{-|q_i - q_j|}
///   dp_i/dt = p_i sum_j p_j sgn(q_i - q_j) e^{-|q_i - q_j|}
template <typename Scalar>
PeakonDeriv<Scalar> multipeakon_rhs(const PeakonState<Scalar>& s,
                                    Scalar gap_tol = Scalar(kCollisionGapTol)) {
  detail::check_gaps(s, gap_tol);
  const Index n = s.size();
  PeakonDeriv<Scalar> d;
  d.qdot = Array<Scalar>::Zero(n);
  d.pdot = Array<Scalar>::Zero(n);
  for (Index i = 0; i < n; ++i) {
    Scalar qd = 0, pd = 0;
    for (Index j = 0; j < n; ++j) {
      const Scalar w = std::exp(-std::abs(s.q[i] - s.q[j]));
      qd += s.p[j] * w;
      pd += s.p[j] * kernels::sgn(s.q[i] - s.q[j]) * w;
    }
    d.qdot[i] = qd;
    d.pdot[i] = s.p[i] * pd;
  }
  return d;
}

/// H = 1/2 sum_ij p_i p_j e^{-|q_i - q_j|}, conserved along the flow.
template <typename Scalar>
Scalar hamiltonian(const PeakonState<Scalar>& s) {
  Scalar h = 0;
  for (Index i = 0; i < s.size(); ++i) {
    for (Index j = 0; j < s.size(); ++j) {
      h += s.p[i] * s.p[j] * std::exp(-std::abs(s.q[i] - s.q[j]));
    }
  }
  return h / Scalar(2);
}

template <typename Scalar>
Scalar total_momentum(const PeakonState<Scalar>& s) {
  return s.size() > 0 ? s.p.sum() : Scalar(0);
}

/// Fixed-step RK4 on the peakon ODEs, reporting each accepted state.
/// CollisionError aborts the flow; states reported so far remain valid.
template <typename Scalar>
PeakonState<Scalar> evolve_peakons(
    PeakonState<Scalar> s, Scalar t_end, Scalar dt,
    const std::function<void(Scalar, const PeakonState<Scalar>&)>& on_step = {},
    Scalar gap_tol = Scalar(kCollisionGapTol)) {
  if (!(t_end >= Scalar(0))) {
    throw std::invalid_argument("evolve_peakons: t_end must be >= 0");
  }
  if (!(dt > Scalar(0))) {
    throw std::invalid_argument("evolve_peakons: dt must be > 0");
  }
  detail::check_gaps(s, gap_tol);
  if (on_step) on_step(Scalar(0), s);

  auto shifted = [](const PeakonState<Scalar>& base, Scalar c,
                    const PeakonDeriv<Scalar>& d) {
    return PeakonState<Scalar>(base.q + c * d.qdot, base.p + c * d.pdot);
  };

  Scalar t = 0;
  const Scalar t_eps = Scalar(1e-12) * std::max(Scalar(1), t_end);
  while (t_end - t > t_eps) {
    const Scalar h = std::min(dt, t_end - t);
    const PeakonDeriv<Scalar> k1 = multipeakon_rhs(s, gap_tol);
    const PeakonDeriv<Scalar> k2 =
        multipeakon_rhs(shifted(s, h / Scalar(2), k1), gap_tol);
    const PeakonDeriv<Scalar> k3 =
        multipeakon_rhs(shifted(s, h / Scalar(2), k2), gap_tol);
    const PeakonDeriv<Scalar> k4 = multipeakon_rhs(shifted(s, h, k3), gap_tol);
    s = PeakonState<Scalar>(
        s.q + h / Scalar(6) *
                  (k1.qdot + Scalar(2) * k2.qdot + Scalar(2) * k3.qdot + k4.qdot),
        s.p + h / Scalar(6) *
                  (k1.pdot + Scalar(2) * k2.pdot + Scalar(2) * k3.pdot + k4.pdot));
    detail::check_gaps(s, gap_tol);
    t += h;
    if (on_step) on_step(t, s);
  }
  return s;
}

}  // namespace chlab::peakons
