#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mslab/config.hpp"
#include "mslab/elliptic.hpp"
#include "mslab/functionals.hpp"
#include "mslab/spectral_field.hpp"

namespace mslab {

enum class VelocityScheme { flat_dtn, elliptic };

/// "flat_dtn" or "elliptic"; anything else throws config_error.
VelocityScheme scheme_from_name(const std::string& name);

/// Interface normal velocity together with the scheme that produced it.
struct VelocityField {
  SpectralField V;
  VelocityScheme source = VelocityScheme::flat_dtn;
};

/// The evolving graph and its clock.
struct InterfaceState {
  SpectralField h;
  double t = 0.0;
};

/// Half-space Dirichlet-to-Neumann velocity 2 |grad| H(h): exact for the
/// flat interface, a controlled surrogate for Lipschitz graphs.  Shares the
/// slope gate of curvature().
VelocityField flat_dtn_velocity(const SpectralField& h);

struct StepControls {
  VelocityScheme scheme = VelocityScheme::flat_dtn;
  double depth_factor = 4.0;   ///< elliptic strip height factor
  double energy_tol = 1e-8;    ///< relative energy-increase rejection threshold
  double change_target = 1e-3; ///< per-step relative-change target for dt control
  double dt_min = 1e-13;       ///< below this an attempted step throws numerical_error
  int max_rejects = 40;        ///< rejections allowed within one step_imex call
};

/// Warm-start carrier for the elliptic scheme; pass the same cache to
/// consecutive steps to reuse the previous two-phase solution.
struct EllipticCache {
  std::optional<TwoPhaseField> field;
};

/// One accepted step plus the diagnostics of the *entry* state, so a caller
/// ledgering at step boundaries never recomputes them.  D0_ledger is the
/// scheme's published dissipation (surrogate half-line norm or elliptic
/// Dirichlet energy); D0_consistent is the discrete pairing
/// sum H * (metric V) * cell actually driving the motion.  The two coincide
/// exactly for the elliptic scheme.
struct StepResult {
  InterfaceState state;
  double dt_used = 0.0;
  double dt_next = 0.0;  ///< controller proposal for the next attempt
  int rejections = 0;
  double E0 = 0.0;
  double D0_ledger = 0.0;
  double D0_consistent = 0.0;
};

/// One adaptive step of h_t = sqrt(1 + |grad h|^2) V(h) by a two-stage
/// exponential integrator: the linearization -2 |grad|^3 is applied through
/// its exact symbol, the remainder explicitly (dealiased, mean projected
/// out).  A stage is rejected, and dt halved, when the slope gate trips, the
/// energy rises beyond energy_tol, or an inner solve fails; dt falling below
/// dt_min throws numerical_error.
StepResult step_imex(const InterfaceState& s, double dt,
                     const StepControls& ctl = {},
                     EllipticCache* cache = nullptr);

/// True when max |h| over the outer 10% of the box (within 5% of the
/// periodic seam on any axis) exceeds tol * sup|h|.  The zero field is
/// never contaminated.
bool boundary_contaminated(const SpectralField& h, double tol);

/// Initial data for run_simulation per cfg.init_family:
///   flat        zero field
///   gaussian    centered bump, height init_amplitude, width init_sigma
///   multibump   init_bumps signed bumps, jittered by cfg.seed
///   band_random random band-limited field (init_gamma, init_jmax, seed)
///               with slope sup init_amplitude
/// With init_energy > 0 the field is then rescaled in amplitude (bisection)
/// to that excess area.  The lip_bound ingest gate is applied by
/// run_simulation, not here.
SpectralField initial_data(const RunConfig& cfg);

/// Everything a finished (or aborted) run produced.  `series` rows are
/// log-spaced step-entry ledger records; `flagged` marks, per row, whether
/// boundary contamination had been detected at or before that time.  The
/// node arrays record every accepted step entry plus the final state, for
/// time-quadrature of the dissipation.  A hard failure (slope gate at every
/// dt, stalled solve, dt underflow) ends the run early: the partial output
/// is kept and abort_reason is set.
struct RunOutput {
  std::vector<FunctionalRecord> series;
  std::vector<std::uint8_t> flagged;
  std::vector<InterfaceState> snapshots;
  std::vector<double> node_t;
  std::vector<double> node_E;
  std::vector<double> node_D_ledger;
  std::vector<double> node_D_consistent;
  InterfaceState final_state;
  std::string abort_reason;      ///< empty on a clean run
  double first_breach_t = -1.0;  ///< first contamination time, -1 = none
  long steps = 0;
  long rejections = 0;
  std::string scheme;  ///< resolved scheme name
};

/// Run one experiment end to end: validate cfg, build initial data, step to
/// t_end with adaptive dt, ledger/snapshot on log-spaced grids, and--when
/// cfg.out is nonempty--persist series.csv, flags.csv, nodes.csv,
/// snapshots/snap_***.csv, and manifest.txt (a loadable config echo).
/// Deterministic: a second run from the same config, or from the written
/// manifest, reproduces every ledger value.
RunOutput run_simulation(const RunConfig& cfg);

}  // namespace mslab
