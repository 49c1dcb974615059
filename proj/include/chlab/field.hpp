#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <utility>

#include "chlab/errors.hpp"

namespace chlab {

using Index = Eigen::Index;

template <typename Scalar>
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

enum class DomainKind { Line, Circle };

/// Spatial setting: a truncated line [-L, L] or the unit circle R/Z.
/// Fields on the line are treated as identically zero outside [-L, L];
/// the circle has period 1, fixed.
template <typename Scalar>
struct Domain {
  DomainKind kind = DomainKind::Circle;
  Scalar half_length = Scalar(0);  // line only

  static Domain line(Scalar half_length) {
    if (!(half_length > Scalar(0))) {
      throw std::invalid_argument("Domain::line: half length must be positive");
    }
    return Domain{DomainKind::Line, half_length};
  }
  static Domain circle() { return Domain{DomainKind::Circle, Scalar(0)}; }

  bool is_line() const { return kind == DomainKind::Line; }
  bool is_circle() const { return kind == DomainKind::Circle; }

  /// Total length: 2L on the line, 1 on the circle.
  Scalar length() const {
    return is_line() ? Scalar(2) * half_length : Scalar(1);
  }

  friend bool operator==(const Domain& a, const Domain& b) {
    if (a.kind != b.kind) return false;
    return a.is_circle() || a.half_length == b.half_length;
  }
  friend bool operator!=(const Domain& a, const Domain& b) { return !(a == b); }
};

/// Uniform sampling of a domain with resolution n (cells on the line,
/// samples on the circle).  Line grids carry both endpoints, x_j = -L + j*dx
/// for j = 0..n; circle grids drop the duplicate point, x_j = j*dx for
/// j = 0..n-1.
template <typename Scalar>
struct Grid {
  Domain<Scalar> domain = Domain<Scalar>::circle();
  Index n = 16;
  Scalar dx = Scalar(1) / Scalar(16);

  static Grid line(Scalar half_length, Index n) {
    check_n(n);
    auto dom = Domain<Scalar>::line(half_length);
    return Grid{dom, n, dom.length() / Scalar(n)};
  }
  static Grid circle(Index n) {
    check_n(n);
    return Grid{Domain<Scalar>::circle(), n, Scalar(1) / Scalar(n)};
  }

  /// Number of samples: n+1 on the line, n on the circle.
  Index size() const { return domain.is_line() ? n + 1 : n; }

  Scalar point(Index j) const {
    return domain.is_line() ? -domain.half_length + Scalar(j) * dx
                            : Scalar(j) * dx;
  }

  Array<Scalar> points() const {
    Array<Scalar> x(size());
    for (Index j = 0; j < size(); ++j) x[j] = point(j);
    return x;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.domain == b.domain && a.n == b.n;
  }
  friend bool operator!=(const Grid& a, const Grid& b) { return !(a == b); }

 private:
  static void check_n(Index n) {
    if (n < 16) throw std::invalid_argument("Grid: resolution n must be >= 16");
  }
};

/// Samples of a scalar function at the grid points.  Values are validated to
/// be finite at construction; treat instances as immutable and derive new
/// fields through the free functions.
template <typename Scalar>
struct Field {
  Grid<Scalar> grid;
  Array<Scalar> values;

  Field(Grid<Scalar> g, Array<Scalar> v)
      : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size()) {
      throw std::invalid_argument("Field: value count does not match grid");
    }
    if (!values.isFinite().all()) {
      throw NonFiniteState("Field: non-finite sample value");
    }
  }

  static Field zero(const Grid<Scalar>& g) {
    return Field(g, Array<Scalar>::Zero(g.size()));
  }

  template <typename Fn>
  static Field sample(const Grid<Scalar>& g, Fn&& fn) {
    Array<Scalar> v(g.size());
    for (Index j = 0; j < g.size(); ++j) v[j] = fn(g.point(j));
    return Field(g, std::move(v));
  }

  Index size() const { return values.size(); }
};

namespace detail {
template <typename Scalar>
void require_same_grid(const Field<Scalar>& a, const Field<Scalar>& b) {
  if (a.grid != b.grid) {
    throw GridMismatch("fields live on different grids");
  }
}
}  // namespace detail

template <typename Scalar>
Field<Scalar> operator+(const Field<Scalar>& a, const Field<Scalar>& b) {
  detail::require_same_grid(a, b);
  return Field<Scalar>(a.grid, a.values + b.values);
}

template <typename Scalar>
Field<Scalar> operator-(const Field<Scalar>& a, const Field<Scalar>& b) {
  detail::require_same_grid(a, b);
  return Field<Scalar>(a.grid, a.values - b.values);
}

template <typename Scalar>
Field<Scalar> operator*(Scalar c, const Field<Scalar>& f) {
  return Field<Scalar>(f.grid, c * f.values);
}

template <typename Scalar>
Field<Scalar> operator-(const Field<Scalar>& f) {
  return Field<Scalar>(f.grid, -f.values);
}

}  // namespace chlab
