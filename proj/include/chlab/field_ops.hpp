#pragma once

#include <cmath>
#include <numbers>

#include "chlab/field.hpp"
#include "chlab/spectral.hpp"

namespace chlab::fields {

namespace detail {

inline void check_order(int order) {
  if (order != 2 && order != 4) {
    throw std::invalid_argument("derivative: stencil order must be 2 or 4");
  }
}

/// Centered differences of the stated order in the interior, one-sided
/// stencils of the same order at the line endpoints.
template <typename Scalar>
Array<Scalar> fd_derivative(const Array<Scalar>& f, Scalar dx, int order) {
  const Index m = f.size();
  Array<Scalar> d(m);
  const Scalar inv = Scalar(1) / dx;
  if (order == 2) {
    d[0] = (Scalar(-3) * f[0] + Scalar(4) * f[1] - f[2]) * (inv / Scalar(2));
    for (Index j = 1; j + 1 < m; ++j) {
      d[j] = (f[j + 1] - f[j - 1]) * (inv / Scalar(2));
    }
    d[m - 1] = (Scalar(3) * f[m - 1] - Scalar(4) * f[m - 2] + f[m - 3]) *
               (inv / Scalar(2));
    return d;
  }
  const Scalar c = inv / Scalar(12);
  d[0] = (Scalar(-25) * f[0] + Scalar(48) * f[1] - Scalar(36) * f[2] +
          Scalar(16) * f[3] - Scalar(3) * f[4]) *
         c;
  d[1] = (Scalar(-3) * f[0] - Scalar(10) * f[1] + Scalar(18) * f[2] -
          Scalar(6) * f[3] + f[4]) *
         c;
  for (Index j = 2; j + 2 < m; ++j) {
    d[j] = (f[j - 2] - Scalar(8) * f[j - 1] + Scalar(8) * f[j + 1] -
            f[j + 2]) *
           c;
  }
  d[m - 2] = (Scalar(3) * f[m - 1] + Scalar(10) * f[m - 2] -
              Scalar(18) * f[m - 3] + Scalar(6) * f[m - 4] - f[m - 5]) *
             c;
  d[m - 1] = (Scalar(25) * f[m - 1] - Scalar(48) * f[m - 2] +
              Scalar(36) * f[m - 3] - Scalar(16) * f[m - 4] +
              Scalar(3) * f[m - 5]) *
             c;
  return d;
}

}  // namespace detail

/// Spatial derivative: spectral differentiation on the circle, centered
/// finite differences (order 2 or 4, default 4) on the line.
template <typename Scalar>
Field<Scalar> derivative(const Field<Scalar>& u, int order = 4) {
  detail::check_order(order);
  if (u.grid.domain.is_circle()) {
    using Cplx = std::complex<Scalar>;
    const Index n = u.grid.n;
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    return spectral::apply_symbol(u, [n, two_pi](Index k) {
      if (2 * k == n) return Cplx(0, 0);  // odd symbol: drop Nyquist
      return Cplx(0, two_pi * Scalar(k));
    });
  }
  return Field<Scalar>(u.grid,
                       detail::fd_derivative(u.values, u.grid.dx, order));
}

/// Trapezoid-rule integral over the domain.
template <typename Scalar>
Scalar integrate(const Field<Scalar>& f) {
  Scalar s = f.values.sum();
  if (f.grid.domain.is_line()) {
    s -= (f.values[0] + f.values[f.size() - 1]) / Scalar(2);
  }
  return s * f.grid.dx;
}

template <typename Scalar>
Scalar norm_l2(const Field<Scalar>& u) {
  using std::sqrt;
  return sqrt(integrate(Field<Scalar>(u.grid, u.values.square())));
}

template <typename Scalar>
Scalar norm_sup(const Field<Scalar>& u) {
  return u.values.abs().maxCoeff();
}

/// H^1 norm with the derivative of the stated stencil order:
/// norm_h1^2 = ||u||_2^2 + ||du||_2^2.
template <typename Scalar>
Scalar norm_h1(const Field<Scalar>& u, int order = 4) {
  const Field<Scalar> du = derivative(u, order);
  using std::sqrt;
  return sqrt(integrate(Field<Scalar>(
      u.grid, u.values.square() + du.values.square())));
}

/// Momentum density y = u - u_xx.  Circle: exact Fourier symbol 1 + (2 pi k)^2;
/// line: the module's derivative applied twice.
template <typename Scalar>
Field<Scalar> momentum(const Field<Scalar>& u, int order = 4) {
  if (u.grid.domain.is_circle()) {
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    return spectral::apply_symbol(u, [two_pi](Index k) {
      const Scalar w = two_pi * Scalar(k);
      return Scalar(1) + w * w;
    });
  }
  const Field<Scalar> uxx = derivative(derivative(u, order), order);
  return u - uxx;
}

/// Largest boundary magnitude max(|u(-L)|, |u(L)|) of a line field; the
/// truncation assumption u == 0 outside [-L, L] is only as good as this.
template <typename Scalar>
Scalar boundary_magnitude(const Field<Scalar>& u) {
  if (!u.grid.domain.is_line()) {
    throw DomainError("boundary_magnitude: line fields only");
  }
  using std::abs;
  return std::max(abs(u.values[0]), abs(u.values[u.size() - 1]));
}

}  // namespace chlab::fields
