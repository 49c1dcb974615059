#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include "chlab/field.hpp"
#include "chlab/spectral.hpp"

namespace chlab::kernels {

/// Exclusion tolerance around integers for the periodic kernel derivative.
inline constexpr double kIntegerExclusionTol = 1e-9;

/// Hard guard on the O(n^2) direct-convolution oracle.
inline constexpr Index kOracleMaxResolution = 8192;

template <typename Scalar>
Scalar sgn(Scalar x) {
  return Scalar((x > Scalar(0)) - (x < Scalar(0)));
}

/// Green's function of (1 - d^2/dx^2) on the line: K(x) = e^{-|x|}/2.
template <typename Scalar>
Scalar line_kernel(Scalar x) {
  using std::abs, std::exp;
  return exp(-abs(x)) / Scalar(2);
}

/// K'(x) = -sgn(x) e^{-|x|}/2 with the odd convention sgn(0) = 0.
template <typename Scalar>
Scalar line_kernel_deriv(Scalar x) {
  using std::abs, std::exp;
  return -sgn(x) * exp(-abs(x)) / Scalar(2);
}

/// Period-1 Green's function of (1 - d^2/dx^2) on the circle:
/// G(x) = cosh(x - floor(x) - 1/2) / (2 sinh(1/2)).
template <typename Scalar>
Scalar periodic_green(Scalar x) {
  using std::cosh, std::floor, std::sinh;
  return cosh(x - floor(x) - Scalar(0.5)) /
         (Scalar(2) * sinh(Scalar(0.5)));
}

/// dG/dx = sinh(x - floor(x) - 1/2) / (2 sinh(1/2)); not defined at
/// integers, where G has a corner.
template <typename Scalar>
Scalar periodic_green_deriv(Scalar x,
                            Scalar exclusion_tol = Scalar(kIntegerExclusionTol)) {
  using std::abs, std::floor, std::round, std::sinh;
  if (abs(x - round(x)) < exclusion_tol) {
    throw IntegerPointError(
        "periodic_green_deriv: evaluation within exclusion tolerance of an "
        "integer point");
  }
  return sinh(x - floor(x) - Scalar(0.5)) / (Scalar(2) * sinh(Scalar(0.5)));
}

namespace detail {

/// Two-sweep recursive exponential filter on a line grid.  Integrates the
/// kernel exactly against the piecewise-linear reconstruction of f, with
/// f == 0 assumed outside [-L, L]:
///   A_i = int_{-L}^{x_i} e^{-(x_i - y)} f(y) dy   (causal sweep)
///   B_i = int_{x_i}^{L}  e^{-(y - x_i)} f(y) dy   (anticausal sweep)
/// Per cell, with alpha = 1 - e^{-dx} and beta = (alpha - dx e^{-dx})/dx:
///   int_0^{dx} e^{-t} [f_near + (f_far - f_near) t/dx] dt
///     = (alpha - beta) f_near + beta f_far.
template <typename Scalar>
std::pair<Array<Scalar>, Array<Scalar>> exponential_sweeps(
    const Array<Scalar>& f, Scalar dx) {
  using std::exp, std::expm1;
  const Index m = f.size();
  const Scalar decay = exp(-dx);
  const Scalar alpha = -expm1(-dx);
  const Scalar beta = (alpha - dx * decay) / dx;
  const Scalar near = alpha - beta;

  Array<Scalar> a(m), b(m);
  a[0] = Scalar(0);
  for (Index i = 1; i < m; ++i) {
    a[i] = decay * a[i - 1] + beta * f[i - 1] + near * f[i];
  }
  b[m - 1] = Scalar(0);
  for (Index i = m - 2; i >= 0; --i) {
    b[i] = decay * b[i + 1] + beta * f[i + 1] + near * f[i];
  }
  return {std::move(a), std::move(b)};
}

}  // namespace detail

/// (1 - d^2/dx^2)^{-1} f.  Circle: division by the Fourier symbol
/// 1 + (2 pi k)^2.  Line: K * f via the two-sweep recursive filter,
/// (A + B)/2.
template <typename Scalar>
Field<Scalar> helmholtz_inverse(const Field<Scalar>& f) {
  if (f.grid.domain.is_circle()) {
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    return spectral::apply_symbol(f, [two_pi](Index k) {
      const Scalar w = two_pi * Scalar(k);
      return Scalar(1) / (Scalar(1) + w * w);
    });
  }
  auto [a, b] = detail::exponential_sweeps(f.values, f.grid.dx);
  return Field<Scalar>(f.grid, (a + b) / Scalar(2));
}

/// d/dx (1 - d^2/dx^2)^{-1} f.  Circle: symbol (2 pi i k)/(1 + (2 pi k)^2);
/// line: K' * f = (B - A)/2 from the same sweeps.
template <typename Scalar>
Field<Scalar> helmholtz_grad_inverse(const Field<Scalar>& f) {
  if (f.grid.domain.is_circle()) {
    using Cplx = std::complex<Scalar>;
    const Index n = f.grid.n;
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    return spectral::apply_symbol(f, [n, two_pi](Index k) {
      if (2 * k == n) return Cplx(0, 0);  // odd symbol: drop Nyquist
      const Scalar w = two_pi * Scalar(k);
      return Cplx(0, w / (Scalar(1) + w * w));
    });
  }
  auto [a, b] = detail::exponential_sweeps(f.values, f.grid.dx);
  return Field<Scalar>(f.grid, (b - a) / Scalar(2));
}

/// Direct trapezoid-rule convolution of f with (K, K') on the line or
/// (G, dG) on the circle.  O(n^2); intended as an independent check of the
/// two operators above, guarded at n <= 8192.  The circle diagonal of dG
/// uses the principal value 0, matching sgn(0) = 0 on the line.
template <typename Scalar>
std::pair<Field<Scalar>, Field<Scalar>> convolution_oracle(
    const Field<Scalar>& f) {
  if (f.grid.n > kOracleMaxResolution) {
    throw SizeExceeded("convolution_oracle: resolution exceeds the n <= 8192 guard");
  }
  const Index m = f.size();
  const Scalar dx = f.grid.dx;
  Array<Scalar> smooth = Array<Scalar>::Zero(m);
  Array<Scalar> grad = Array<Scalar>::Zero(m);

  if (f.grid.domain.is_line()) {
    // Offset tables; K is even and K' odd, so only |i - j| is stored.
    Array<Scalar> kk(m), kd(m);
    for (Index d = 0; d < m; ++d) {
      kk[d] = line_kernel(Scalar(d) * dx);
      kd[d] = line_kernel_deriv(Scalar(d) * dx);
    }
    for (Index i = 0; i < m; ++i) {
      Scalar acc_k = 0, acc_d = 0;
      for (Index j = 0; j < m; ++j) {
        const Index d = i >= j ? i - j : j - i;
        const Scalar w =
            (j == 0 || j == m - 1) ? Scalar(0.5) : Scalar(1);
        const Scalar fj = w * f.values[j];
        acc_k += kk[d] * fj;
        acc_d += (i >= j ? kd[d] : -kd[d]) * fj;
      }
      smooth[i] = acc_k * dx;
      grad[i] = acc_d * dx;
    }
  } else {
    const Index n = f.grid.n;
    Array<Scalar> gk(n), gd(n);
    for (Index d = 0; d < n; ++d) {
      const Scalar x = Scalar(d) * dx;
      gk[d] = periodic_green(x);
      gd[d] = d == 0 ? Scalar(0) : periodic_green_deriv(x);
    }
    for (Index i = 0; i < n; ++i) {
      Scalar acc_k = 0, acc_d = 0;
      for (Index j = 0; j < n; ++j) {
        const Index d = (i - j + n) % n;
        acc_k += gk[d] * f.values[j];
        acc_d += gd[d] * f.values[j];
      }
      smooth[i] = acc_k * dx;
      grad[i] = acc_d * dx;
    }
  }
  return {Field<Scalar>(f.grid, std::move(smooth)),
          Field<Scalar>(f.grid, std::move(grad))};
}

}  // namespace chlab::kernels
