#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace mslab {

/// Uniform periodic grid on [0,L)^dim with n points per axis, dim in {1,2}.
/// n must be a power of two >= 8 so that transform sizes and the 2/3-rule
/// band split exactly and dx * n == L holds exactly in floating point.
///
/// Wavenumbers follow transform order: index j maps to the signed integer
/// jj in {0,...,n/2, -n/2+1,...,-1} and k = 2*pi*jj/L.  The unpaired mode
/// at jj = n/2 is kept by even-symbol operators and zeroed by odd ones.
struct TorusGrid {
  int dim = 1;
  int n = 0;
  double L = 0.0;
  double dx = 0.0;

  std::vector<double> k1;       ///< per-axis signed wavenumber, size n
  std::vector<double> kmag;     ///< |k| per flat index, size n^dim
  std::vector<std::uint8_t> keep23;  ///< 2/3-rule mask per flat index

  std::size_t size() const { return dim == 1 ? std::size_t(n) : std::size_t(n) * std::size_t(n); }
  double cell() const { return dim == 1 ? dx : dx * dx; }  ///< quadrature weight dx^dim
  double volume() const { return dim == 1 ? L : L * L; }
  double kmin() const { return k1[1]; }  ///< smallest positive wavenumber 2*pi/L

  /// physical coordinate of axis index i
  double x(int i) const { return dx * i; }

  bool compatible(const TorusGrid& o) const {
    return dim == o.dim && n == o.n && L == o.L;
  }
};

using GridPtr = std::shared_ptr<const TorusGrid>;

/// Build a grid, validating dim, the power-of-two constraint on n, and L > 0.
GridPtr make_grid(int dim, int n, double L);

}  // namespace mslab
