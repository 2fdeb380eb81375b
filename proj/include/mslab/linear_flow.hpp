#pragma once

#include <string>
#include <vector>

#include "mslab/spectral_field.hpp"

namespace mslab {

/// Fourier-side table of the relaxation semigroup: entry e^{-2|k|^3 t} per
/// mode.  The zero mode carries exactly 1 (mean conservation) and every
/// entry lies in (0, 1] for t > 0.
struct LinearPropagator {
  GridPtr grid;
  double t = 0.0;
  std::vector<double> symbol;
};

/// t < 0 is rejected; backward evolution goes through adjoint_evolve.
LinearPropagator make_propagator(GridPtr grid, double t);

/// Entrywise application of the symbol table; f must live on p.grid.
SpectralField apply(const LinearPropagator& p, const SpectralField& f);

/// h(t) with coefficients e^{-2|k|^3 t} h0^(k) -- exact in time, the only
/// error is rounding.
SpectralField evolve_linear(const SpectralField& h0, double t);

/// Terminal-value problem: u(T) = psi evolved backward to time t, i.e.
/// coefficients e^{-2|k|^3 (T - t)} psi^(k).  Requires 0 <= t <= T.
SpectralField adjoint_evolve(const SpectralField& psi, double T, double t);

/// Radial table of the self-similar kernel G~ = G(t = 1), produced by exact
/// trigonometric synthesis of the periodized symbol e^{-2|k|^3} along a
/// coordinate axis.  Convergence of the periodization is estimated by domain
/// doubling on the outer 10% of the radii.
struct KernelProfile {
  int dim = 1;
  std::vector<double> r;      ///< radii, uniformly spaced from 0 to r_max
  std::vector<double> value;  ///< G~(r_i)
  double normalization = 0.0; ///< integral over the torus; 1 by construction
  double tail_drift = 0.0;    ///< max relative change on the outer radii under doubling
  bool tail_converged = false;  ///< tail_drift <= 1e-4
  double max_second_diff = 0.0; ///< max |second difference| / dr^2 over the table
  double domain = 0.0;          ///< edge length of the final (doubled) torus
  double grid_dx = 0.0;         ///< spatial spacing of the synthesis grid
};

/// dim in {1,2}, r_max > 0, n_samples >= 16.  domain_hint (power of two, 0 =
/// automatic) sets the smaller torus of the doubling pair; undersized hints
/// are honored so the convergence flag can be exercised.
KernelProfile kernel_profile(int dim, double r_max, int n_samples,
                             double domain_hint = 0.0);

/// Two-column CSV (r, value) with a header comment recording dimension,
/// synthesis grid, and the tail-convergence estimate.
void write_profile_csv(const KernelProfile& p, const std::string& path);

/// Empirical constants for the backward-evolution decay estimates.  Each row
/// reports, per terminal time T, the supremum over the supplied family and
/// over a log grid of offsets s = T - t of the scaled sup-norm; `variation`
/// is the max/min ratio across the T grid and `bounded` means variation <= 2.
struct BoundsRow {
  std::string name;
  std::vector<double> constant;  ///< one entry per T
  double variation = 1.0;
  bool bounded = true;
};

struct LinearBoundsReport {
  std::vector<double> T_grid;
  std::vector<BoundsRow> rows;
};

/// Rows: sup_u            = ||u(t)||_inf / ||psi||_inf
///       sup_v            = s^{1/3} || |grad| u ||_inf / ||psi||_inf
///       sup_grad_v       = s^{2/3} || grad |grad| u ||_inf / ||psi||_inf
///       sup_dz_grad_v    = s       || grad |grad|^2 u ||_inf / ||psi||_inf
///       spatial_tail     = sup over an (r, theta) fan of r^dim |ubar(x, z)|,
/// where ubar is the harmonic extension of u(0).  The tail estimate only
/// makes sense for localized data, so that row is measured on an internally
/// generated bump (width scaled to the domain), not on the family.
LinearBoundsReport verify_linear_bounds(const std::vector<SpectralField>& family,
                                        const std::vector<double>& T_grid);

}  // namespace mslab
