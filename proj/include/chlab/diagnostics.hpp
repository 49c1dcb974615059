#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "chlab/field_ops.hpp"
#include "chlab/kernels.hpp"
#include "chlab/model.hpp"

namespace chlab::diagnostics {

template <typename Scalar>
struct Interval {
  Scalar a;
  Scalar b;
  Scalar width() const { return b - a; }
};

enum class ProbeVerdict {
  ConsistentWithZeroSolution,
  StrictInequalityWitness,
  Inconclusive,
};

inline const char* to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::ConsistentWithZeroSolution:
      return "ConsistentWithZeroSolution";
    case ProbeVerdict::StrictInequalityWitness:
      return "StrictInequalityWitness";
    case ProbeVerdict::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

template <typename Scalar>
struct ProbeOptions {
  /// Defaults to 1e-10 times the domain length when unset.
  std::optional<Scalar> mass_tol;
  Scalar ineq_tol = Scalar(1e-12);
  int fd_order = 4;
  Scalar t_star = Scalar(0);
};

template <typename Scalar>
struct ProbeReport {
  Interval<Scalar> interval{};
  Scalar t_star = 0;
  Scalar F_a = 0;  // endpoint values of F, linearly interpolated
  Scalar F_b = 0;
  Scalar F_a_grid = 0;  // nearest-grid-point values, kept for audit
  Scalar F_b_grid = 0;
  Scalar f_mass = 0;
  Scalar max_u_on_interval = 0;
  Scalar mass_tol = 0;
  Scalar ineq_tol = 0;
  ProbeVerdict verdict = ProbeVerdict::Inconclusive;

  Scalar gap() const { return F_b - F_a; }
};

template <typename Scalar>
struct DecayFit {
  Scalar theta = 0;
  Scalar residual = 0;  // root-mean-square misfit of the log-linear model
  int points = 0;
};

namespace detail {

template <typename Scalar>
void require_inside(const Grid<Scalar>& grid, Scalar a, Scalar b) {
  if (!(a < b)) {
    throw IntervalOutsideDomain("probe interval: endpoints must satisfy a < b");
  }
  if (grid.domain.is_circle()) {
    if (!(Scalar(0) < a && b < Scalar(1))) {
      throw IntervalOutsideDomain(
          "probe interval: circle endpoints must satisfy 0 < a < b < 1");
    }
  } else {
    const Scalar L = grid.domain.half_length;
    if (!(-L <= a && b <= L)) {
      throw IntervalOutsideDomain(
          "probe interval: line endpoints must lie in [-L, L]");
    }
  }
}

/// Piecewise-linear interpolation of grid samples at coordinate x.
template <typename Scalar>
Scalar interp(const Field<Scalar>& u, Scalar x) {
  const Grid<Scalar>& g = u.grid;
  if (g.domain.is_circle()) {
    Scalar s = x - std::floor(x);
    const Scalar pos = s / g.dx;
    Index j = static_cast<Index>(std::floor(pos));
    j = std::clamp<Index>(j, 0, g.n - 1);
    const Scalar w = pos - Scalar(j);
    return (Scalar(1) - w) * u.values[j] + w * u.values[(j + 1) % g.n];
  }
  const Scalar pos = (x + g.domain.half_length) / g.dx;
  Index j = static_cast<Index>(std::floor(pos));
  j = std::clamp<Index>(j, 0, g.n - 1);
  const Scalar w = pos - Scalar(j);
  return (Scalar(1) - w) * u.values[j] + w * u.values[j + 1];
}

template <typename Scalar>
Index nearest_index(const Grid<Scalar>& g, Scalar x) {
  if (g.domain.is_circle()) {
    const Scalar s = x - std::floor(x);
    const Index j = static_cast<Index>(std::llround(s / g.dx));
    return ((j % g.n) + g.n) % g.n;
  }
  const Index j =
      static_cast<Index>(std::llround((x + g.domain.half_length) / g.dx));
  return std::clamp<Index>(j, 0, g.n);
}

/// Inclusive index range of grid points with a <= x <= b (never wraps; the
/// probe interval is an ordinary sub-interval of the fundamental domain).
template <typename Scalar>
std::pair<Index, Index> index_range(const Grid<Scalar>& g, Scalar a, Scalar b) {
  const Scalar origin = g.domain.is_circle() ? Scalar(0) : -g.domain.half_length;
  Index lo = static_cast<Index>(std::ceil((a - origin) / g.dx - Scalar(1e-12)));
  Index hi = static_cast<Index>(std::floor((b - origin) / g.dx + Scalar(1e-12)));
  lo = std::max<Index>(lo, 0);
  hi = std::min<Index>(hi, g.size() - 1);
  return {lo, hi};
}

}  // namespace detail

/// E(u) = integral of u^2 + (du/dx)^2, conserved by the evolution.
template <typename Scalar>
Scalar energy(const Field<Scalar>& u, int order = 4) {
  const Field<Scalar> ux = fields::derivative(u, order);
  return fields::integrate(
      Field<Scalar>(u.grid, u.values.square() + ux.values.square()));
}

/// Discrete sup of |du/dx|; its divergence is the wave-breaking signature.
template <typename Scalar>
Scalar max_slope(const Field<Scalar>& u, int order = 4) {
  return fields::norm_sup(fields::derivative(u, order));
}

/// Least-squares exponential rate: fits log|u| ~ c - theta * x over the
/// window, ignoring samples with |u| below 1e-14.
template <typename Scalar>
DecayFit<Scalar> decay_rate(const Field<Scalar>& u, Scalar x0, Scalar x1) {
  if (!u.grid.domain.is_line()) {
    throw DomainError("decay_rate: defined on line domains only");
  }
  if (!(Scalar(0) < x0 && x0 < x1)) {
    throw std::invalid_argument("decay_rate: window must satisfy 0 < x0 < x1");
  }
  if (x1 > u.grid.domain.half_length) {
    throw IntervalOutsideDomain("decay_rate: window extends beyond the domain");
  }
  constexpr Scalar floor = Scalar(1e-14);
  const auto [lo, hi] = detail::index_range(u.grid, x0, x1);
  std::vector<Scalar> xs, ys;
  for (Index j = lo; j <= hi; ++j) {
    const Scalar a = std::abs(u.values[j]);
    if (a >= floor) {
      xs.push_back(u.grid.point(j));
      ys.push_back(std::log(a));
    }
  }
  if (xs.size() < 2) {
    throw DegenerateWindow("decay_rate: no signal above 1e-14 in [" +
                           std::to_string(double(x0)) + ", " +
                           std::to_string(double(x1)) + "]");
  }
  const Scalar m = Scalar(xs.size());
  Scalar mean_x = 0, mean_y = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= m;
  mean_y /= m;
  Scalar sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
  }
  if (!(sxx > Scalar(0))) {
    throw DegenerateWindow("decay_rate: window narrower than one grid cell");
  }
  DecayFit<Scalar> fit;
  fit.theta = -sxy / sxx;
  fit.points = static_cast<int>(xs.size());
  Scalar ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Scalar r = ys[i] - (mean_y - fit.theta * (xs[i] - mean_x));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

/// Maximal runs of consecutive grid points where max(|u|, |du/dx|) < eps,
/// reported as closed intervals [a, b] of width >= min_width.  Runs crossing
/// the circle seam are reported as two intervals, one on each side.
template <typename Scalar>
std::vector<Interval<Scalar>> find_vanishing_intervals(const Field<Scalar>& u,
                                                       Scalar eps,
                                                       Scalar min_width,
                                                       int order = 4) {
  if (!(eps > Scalar(0))) {
    throw std::invalid_argument("find_vanishing_intervals: eps must be > 0");
  }
  if (!(min_width >= Scalar(4) * u.grid.dx)) {
    throw std::invalid_argument(
        "find_vanishing_intervals: min_width must be >= 4*dx");
  }
  const Field<Scalar> ux = fields::derivative(u, order);
  const Index m = u.grid.size();
  std::vector<Interval<Scalar>> out;
  Index run_start = -1;
  const Scalar slack = min_width * Scalar(1e-12);
  for (Index j = 0; j <= m; ++j) {
    const bool flat =
        j < m && std::max(std::abs(u.values[j]), std::abs(ux.values[j])) < eps;
    if (flat && run_start < 0) run_start = j;
    if (!flat && run_start >= 0) {
      const Scalar a = u.grid.point(run_start);
      const Scalar b = u.grid.point(j - 1);
      if (b - a + slack >= min_width) out.push_back({a, b});
      run_start = -1;
    }
  }
  return out;
}

namespace detail {

/// Shared core of the probe: everything after f has been assembled.
template <typename Scalar>
ProbeReport<Scalar> probe_flux(const Field<Scalar>& u, const Field<Scalar>& f,
                               Scalar a, Scalar b,
                               const ProbeOptions<Scalar>& opt) {
  require_inside(u.grid, a, b);
  const Field<Scalar> F = kernels::helmholtz_grad_inverse(f);

  ProbeReport<Scalar> report;
  report.interval = {a, b};
  report.t_star = opt.t_star;
  report.F_a = interp(F, a);
  report.F_b = interp(F, b);
  report.F_a_grid = F.values[nearest_index(F.grid, a)];
  report.F_b_grid = F.values[nearest_index(F.grid, b)];
  report.f_mass = fields::integrate(f);
  report.mass_tol =
      opt.mass_tol.value_or(Scalar(1e-10) * u.grid.domain.length());
  report.ineq_tol = opt.ineq_tol;

  const auto [lo, hi] = index_range(u.grid, a, b);
  Scalar umax = 0;
  for (Index j = lo; j <= hi; ++j) {
    umax = std::max(umax, std::abs(u.values[j]));
  }
  report.max_u_on_interval = umax;

  if (report.f_mass <= report.mass_tol) {
    report.verdict = ProbeVerdict::ConsistentWithZeroSolution;
  } else if (report.gap() > report.ineq_tol) {
    report.verdict = ProbeVerdict::StrictInequalityWitness;
  } else {
    report.verdict = ProbeVerdict::Inconclusive;
  }
  return report;
}

template <typename Scalar>
Field<Scalar> flux_field(const model::ModelSpec<Scalar>& m,
                         const Field<Scalar>& u, int fd_order) {
  const Field<Scalar> ux = fields::derivative(u, fd_order);
  Array<Scalar> f(u.size());
  for (Index j = 0; j < u.size(); ++j) {
    f[j] = m.eval_h(u.values[j], ux.values[j]);
  }
  return Field<Scalar>(u.grid, std::move(f));
}

}  // namespace detail

/// The unique-continuation probe.  Builds f = h(u, du/dx), pushes it through
/// the non-local operator F = d/dx (1 - d^2/dx^2)^{-1} f, and compares the
/// endpoint values.  A field that vanishes on [a, b] yet carries flux mass
/// elsewhere must open a strictly positive gap F(b) - F(a); zero mass is the
/// only way to close it.
template <typename Scalar>
ProbeReport<Scalar> uc_probe(const model::ModelSpec<Scalar>& m,
                             const Field<Scalar>& u, Scalar a, Scalar b,
                             const ProbeOptions<Scalar>& opt = {}) {
  return detail::probe_flux(u, detail::flux_field(m, u, opt.fd_order), a, b,
                            opt);
}

/// Max over grid points strictly inside (a, b) of the defect in the operator
/// identity  d/dx F = (1 - d^2/dx^2)^{-1} f - f,  with f = h(u, du/dx).
/// Exact in symbol space, so the circle residual is pure roundoff; on the
/// line it shrinks at the quadrature rate.
template <typename Scalar>
Scalar fprime_identity_residual(const model::ModelSpec<Scalar>& m,
                                const Field<Scalar>& u, Scalar a, Scalar b,
                                const ProbeOptions<Scalar>& opt = {}) {
  detail::require_inside(u.grid, a, b);
  const Field<Scalar> f = detail::flux_field(m, u, opt.fd_order);
  const Field<Scalar> F = kernels::helmholtz_grad_inverse(f);
  const Field<Scalar> DF = fields::derivative(F, opt.fd_order);
  const Field<Scalar> Hf = kernels::helmholtz_inverse(f);
  const auto [lo, hi] = detail::index_range(u.grid, a, b);
  Scalar worst = 0;
  for (Index j = lo; j <= hi; ++j) {
    const Scalar x = u.grid.point(j);
    if (!(a < x && x < b)) continue;
    worst = std::max(worst,
                     std::abs(DF.values[j] - (Hf.values[j] - f.values[j])));
  }
  return worst;
}

}  // namespace chlab::diagnostics
