#pragma once

#include <complex>
#include <span>
#include <vector>

#include "mslab/grid.hpp"

namespace mslab {

/// Real periodic field with lazily synchronized physical samples and Fourier
/// coefficients.  Either representation can be mutated; the other is rebuilt
/// on demand through the cached transform plans.  The forward transform is
/// normalized by 1/n^dim, so coefficients are Fourier-series coefficients:
/// values(x) = sum_k coeff(k) e^{i k.x}.
class SpectralField {
 public:
  explicit SpectralField(GridPtr grid);  // zero field

  static SpectralField from_values(GridPtr grid, std::vector<double> v);
  static SpectralField from_coeffs(GridPtr grid, std::vector<std::complex<double>> c);

  const TorusGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  std::span<const double> values() const;
  std::span<const std::complex<double>> coeffs() const;

  /// Mutable access: marks the other representation stale.
  std::vector<double>& mutable_values();
  std::vector<std::complex<double>>& mutable_coeffs();

  /// Largest |imag| left behind by the most recent coefficient-to-value
  /// synchronization, relative to the field's max amplitude (0 if none ran).
  double imag_residue() const { return imag_residue_; }

  /// max_k |c(k) - conj(c(-k))| over paired modes; diagnostic for tests.
  double conjugate_defect() const;

  double coeff0() const;  ///< mean value (zero-mode coefficient, real part)

 private:
  void sync_values() const;
  void sync_coeffs() const;

  GridPtr grid_;
  mutable std::vector<double> values_;
  mutable std::vector<std::complex<double>> coeffs_;
  mutable bool values_ok_ = false;
  mutable bool coeffs_ok_ = false;
  mutable double imag_residue_ = 0.0;
};

}  // namespace mslab
