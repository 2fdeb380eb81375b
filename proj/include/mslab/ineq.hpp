#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mslab/grid.hpp"
#include "mslab/spectral_field.hpp"

namespace mslab {

/// Recipe for one random test field.
struct SampleSpec {
  GridPtr grid;
  double gamma = 2.0;       ///< spectral envelope exponent, |c_k| ~ |k|^{-gamma}
  std::uint64_t seed = 0;
  double lip_target = 0.5;  ///< ||grad h||_inf after rescaling, in (0, 1]
  int jmax = 0;             ///< per-axis mode cap; 0 = full 2/3-Nyquist band
};

/// Random band-limited field: independent complex Gaussian coefficients with
/// envelope |k|^{-gamma} on the 2/3-Nyquist band (conjugate-symmetric, zero
/// mean), rescaled so that ||grad h||_inf equals lip_target exactly.  Each
/// mode draws from its own derived stream, so the field is bit-reproducible
/// from (grid, seed) alone and truncating the band does not shift the
/// remaining modes.
SpectralField sample_field(const SampleSpec& spec);

/// Deterministic ensemble: sample i uses seed seed0 + i, with envelope and
/// steepness swept over [gamma_lo, gamma_hi] x [lip_lo, lip_hi] by per-sample
/// derived uniforms.
std::vector<SampleSpec> make_ensemble(GridPtr grid, int count,
                                      std::uint64_t seed0,
                                      double gamma_lo = 0.5,
                                      double gamma_hi = 3.0,
                                      double lip_lo = 0.05,
                                      double lip_hi = 0.9, int jmax = 0);

/// Outcome of one randomized inequality sweep.  max_ratio is the empirical
/// constant sup LHS/RHS over the ensemble; doubling_drift is the relative
/// change of the argmax sample's ratio when re-evaluated with the same
/// spectrum on a grid of twice the resolution.
struct InequalityReport {
  std::string inequality_id;
  long n_samples = 0;  ///< ratios evaluated (degenerate samples excluded)
  long skipped = 0;    ///< flat / zero-denominator samples
  double max_ratio = 0.0;
  std::uint64_t argmax_seed = 0;
  double doubling_drift = 0.0;
  int rechecks = 0;  ///< outliers re-evaluated at doubled resolution
};

enum class DissipationRoute { surrogate, elliptic };

/// Energy--excess-mass--dissipation interpolation
///   E <= C * V^{6/(d+5)} * D^{(d+2)/(d+5)}
/// with D from the flat-interface surrogate or, in one dimension, the
/// resolved two-phase solve.
InequalityReport check_eed(const std::vector<SampleSpec>& samples,
                           DissipationRoute route = DissipationRoute::surrogate);

/// Gagliardo--Nirenberg--Sobolev interpolation suite.  Items:
///   i     (d=2)  ||g||_inf  <= C ||g||_2^{(p-2)/(2(p-1))} || |grad g| ||_p^{p/(2(p-1))},  p > 2
///   ii    (any)  ||h||_2    <= C ||h||_1^{2/(d+2)} ||grad h||_2^{d/(d+2)}
///   iii   (any)  ||grad h||_2 <= C ||h||_1^{2/(d+4)} ||D^2 h||_2^{(d+2)/(d+4)}
///   iv    (d=2)  ||h||_inf  <= C ||h||_1^{1/5} ||grad h||_2^{2/5} ||grad h||_inf^{2/5}
///   iv_1d (d=1)  ||h||_inf  <= C ||h||_1^{1/3} ||h_x||_2^{2/3}
///   v     (d=2)  ||g||_q    <= C ||g||_2^{2/q} ||grad g||_2^{(q-2)/q},  q >= 2
/// `exponent` supplies p (item i) or q (item v) and is ignored elsewhere.
InequalityReport check_gns(const std::string& item,
                           const std::vector<SampleSpec>& samples,
                           double exponent = 4.0);

/// || V^2 ||_{H^{1/2}}^2 <= C ||V||_6^3 || grad V ||_2 for zero-mean V; the
/// square is formed pointwise with 2/3-rule dealiasing before the spectral
/// seminorm is taken.
InequalityReport check_v2(const std::vector<SampleSpec>& samples);

/// Hessian control by curvature, || D^2 h ||_p <= C ||H||_p (flat measure
/// both sides).  Guaranteed only for p near 2: growth of the empirical
/// constant at larger p is informative, not a defect.
InequalityReport check_hessian_by_curvature(
    const std::vector<SampleSpec>& samples, double p);

/// Curvature integrability (d=2, 2 <= p <= 4, surface measure):
///   ||H||_p <= C * E^{(4-p)/(6p)} * D^{2(p-1)/(3p)}.
InequalityReport check_curvature_lp(const std::vector<SampleSpec>& samples,
                                    double p);

/// Endpoint-singularity time integral: for 0 < a, b < 1 with a + b >= 1,
///   integral_0^T (T-t)^{-a} t^{-b} dt = B(1-b, 1-a) * T^{1-a-b}.
/// Evaluates the integral by substitution-desingularized adaptive quadrature
/// over the (a, b, T) grid; max_ratio is the worst quadrature/Beta ratio
/// (should be 1), doubling_drift the worst relative spread across T for a
/// fixed (a, b).  Pairs with a + b < 1 are rejected.
InequalityReport check_tint(const std::vector<double>& a_grid,
                            const std::vector<double>& b_grid,
                            const std::vector<double>& T_grid);

/// CSV with columns inequality_id,n_samples,max_ratio,argmax_seed,doubling_drift.
void write_inequality_csv(const std::string& path,
                          const std::vector<InequalityReport>& reports);

}  // namespace mslab
