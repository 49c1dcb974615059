#pragma once

#include <unsupported/Eigen/FFT>

#include <complex>

#include "chlab/field.hpp"

namespace chlab::spectral {

/// Integer wavenumber of DFT bin j for an n-point period-1 grid:
/// k = j for j <= n/2, k = j - n otherwise.
inline Index wavenumber(Index j, Index n) { return (2 * j <= n) ? j : j - n; }

/// Applies a Fourier multiplier on a circle field.  `symbol(k)` receives the
/// integer wavenumber and returns the (complex) multiplier; the Nyquist bin
/// of even grids is passed k = +n/2, so odd symbols should return 0 there.
/// A fresh FFT plan is built per call, which keeps this function free of
/// shared mutable state.
template <typename Scalar, typename SymbolFn>
Field<Scalar> apply_symbol(const Field<Scalar>& f, SymbolFn&& symbol) {
  if (!f.grid.domain.is_circle()) {
    throw DomainError("spectral::apply_symbol: circle fields only");
  }
  const Index n = f.grid.n;
  using Cplx = std::complex<Scalar>;
  Eigen::Matrix<Cplx, Eigen::Dynamic, 1> in(n), freq(n), out(n);
  for (Index j = 0; j < n; ++j) in[j] = Cplx(f.values[j], Scalar(0));

  Eigen::FFT<Scalar> fft;
  fft.fwd(freq, in);
  for (Index j = 0; j < n; ++j) freq[j] *= Cplx(symbol(wavenumber(j, n)));
  fft.inv(out, freq);

  Array<Scalar> v(n);
  for (Index j = 0; j < n; ++j) v[j] = out[j].real();
  return Field<Scalar>(f.grid, std::move(v));
}

/// 2/3-rule dealiasing: zeroes all modes with |k| > n/3.
template <typename Scalar>
Field<Scalar> dealias_23(const Field<Scalar>& f) {
  const Index kmax = f.grid.n / 3;
  return apply_symbol(f, [kmax](Index k) {
    return std::abs(k) > kmax ? Scalar(0) : Scalar(1);
  });
}

}  // namespace chlab::spectral
