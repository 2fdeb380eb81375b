#pragma once

#include <span>
#include <string>
#include <vector>

#include "mslab/spectral_field.hpp"

namespace mslab {

/// One ledger row of monitored quantities at a fixed time.
struct FunctionalRecord {
  double t = 0.0;
  double E = 0.0;            ///< excess interface area
  double D = 0.0;            ///< dissipation, source tagged below
  std::string D_source;      ///< "elliptic" or "surrogate"
  double Vmass = 0.0;        ///< ||h||_1
  double lip = 0.0;          ///< ||grad h||_inf
  double dimless = 0.0;      ///< E^(3-dim) * D^dim
  double signed_mass = 0.0;  ///< integral of h
  double h_inf = 0.0;        ///< ||h||_inf
};

enum class DSource { surrogate, elliptic };

/// Excess area integral of sqrt(1 + |grad h|^2) - 1, evaluated in the
/// cancellation-free form |grad h|^2 / (metric + 1).  Always >= 0.
double energy(const SpectralField& h);

double excess_mass(const SpectralField& h);  ///< ||h||_1
double signed_mass(const SpectralField& h);  ///< integral of h

/// Mean curvature of the graph z = h(x): Div(grad h / sqrt(1 + |grad h|^2)),
/// with the quotient formed pointwise and the divergence taken spectrally.
/// Sign convention: a small single mode a sin(kx) has H ~ -a k^2 sin(kx).
SpectralField curvature(const SpectralField& h);

/// Dissipation through the half-line Dirichlet norm of a given interface
/// curvature: 2 * L^dim * sum_k |k| |H^(k)|^2 (both bulk phases).  For a
/// flat interface this equals the two-sided harmonic-extension energy
/// exactly; for Lipschitz graphs it tracks the elliptic value up to the
/// norm-equivalence factor.
double dissipation_surrogate_curvature(const SpectralField& H);

/// The same, with H computed from h.
double dissipation_surrogate(const SpectralField& h);

struct CurvatureNorms {
  double H_l2 = 0.0;      ///< ||H||_{L^2} with surface measure
  double H_l4 = 0.0;      ///< ||H||_{L^4} with surface measure
  double H_lp = 0.0;      ///< ||H||_{L^p} with surface measure (default p=4)
  double hess_l2 = 0.0;   ///< || D^2 h ||_{L^2}, flat measure
  double hess_lp = 0.0;   ///< || |D^2 h| ||_{L^p}, flat measure (default p=4)
};

CurvatureNorms curvature_norms(const SpectralField& h, double p = 4.0);

/// Assemble one ledger row.  With DSource::elliptic the caller supplies the
/// dissipation value (d_value >= 0); with DSource::surrogate it is computed
/// here and d_value is ignored.
FunctionalRecord make_record(double t, const SpectralField& h, DSource src,
                             double d_value = -1.0);

/// Ledger CSV with the exact column set
/// t,E,D,D_source,Vmass,lip,dimless,signed_mass,h_inf
void write_ledger_csv(const std::string& path,
                      std::span<const FunctionalRecord> rows);
std::vector<FunctionalRecord> read_ledger_csv(const std::string& path);

}  // namespace mslab
