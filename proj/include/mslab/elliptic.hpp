#pragma once

#include <vector>

#include "mslab/spectral_field.hpp"

namespace mslab {

/// Potential of the two-phase Laplace problem posed over a one-dimensional
/// periodic interface z = h(x).  Each phase is flattened onto the strip
/// [0, Z] x torus by z' = |z - h(x)|, which trades the curved boundary for an
/// x-dependent shear in the coefficients.  Level 0 carries the shared
/// Dirichlet data; the cap at z' = Z is a homogeneous Neumann row.
struct TwoPhaseField {
  GridPtr grid;                          ///< interface grid (dim == 1)
  int levels = 0;                        ///< vertical cells per phase
  double depth = 0.0;                    ///< strip height Z
  std::vector<double> f_plus, f_minus;   ///< (levels+1) x n samples, level-major
  std::vector<double> shear_plus, shear_minus;  ///< per-cell cross coefficients
  int iters_plus = 0, iters_minus = 0;   ///< CG iterations spent per phase
  double residual_inf = 0.0;             ///< worst interior equation residual
};

struct EllipticResult {
  TwoPhaseField field;
  SpectralField V;        ///< normal velocity at the interface nodes
  double D = 0.0;         ///< two-phase Dirichlet energy
  double mean_flux = 0.0; ///< net flux through the interface (conservation check)
};

struct EllipticOptions {
  double depth_factor = 4.0;  ///< Z = depth_factor * L; values below 2 rejected
  double tol = 1e-11;         ///< relative residual target per phase solve
  int max_iters = 500;
  const TwoPhaseField* warm_start = nullptr;  ///< reused when shapes match
};

/// Solve both phases with interface Dirichlet data g and return the jump flux
/// as a pointwise velocity, the Dirichlet energy D, and the solved potential.
/// The discrete flux is recovered variationally from the interface-row
/// residual, so D equals the g-flux pairing and the net flux vanishes to
/// solver tolerance.  Throws config_error for dim != 1, mismatched grids, or
/// bad options; numerical_error when the slope gate fails or CG stalls.
EllipticResult elliptic_solve(const SpectralField& h, const SpectralField& g,
                              const EllipticOptions& opts = {});

/// Velocity of the interface motion: elliptic_solve with g = curvature(h).
EllipticResult elliptic_velocity(const SpectralField& h, const EllipticOptions& opts = {});

}  // namespace mslab
