#pragma once

#include <vector>

#include "mslab/spectral_field.hpp"

namespace mslab {

/// Fractional-Laplacian-type multiplier |k|^alpha for alpha >= -1.
/// Zero mode: annihilated for alpha < 0 (no locally integrable kernel would
/// carry it), preserved for alpha == 0 (|0|^0 := 1), zero for alpha > 0.
/// alpha < -1 is rejected.
SpectralField apply_multiplier(const SpectralField& f, double alpha);

/// Spectral derivative along one axis (symbol i*k); the unpaired Nyquist
/// mode is zeroed so the result stays real-symmetric.
SpectralField derivative(const SpectralField& f, int axis);

/// All first derivatives, size dim.
std::vector<SpectralField> gradient(const SpectralField& f);

/// Symbol -|k|^2 (even: Nyquist kept).
SpectralField laplacian(const SpectralField& f);

/// Harmonic extension to height z >= 0 of the half-space problem: symbol
/// e^{-|k| z}.  Constants extend to themselves at every height.
SpectralField poisson_extend(const SpectralField& f, double z);

/// Zero all modes with any axis index beyond floor(n/3) (2/3 rule).
void dealias(SpectralField& f);

/// Pointwise product followed by 2/3-rule truncation.
SpectralField multiply_dealiased(const SpectralField& a, const SpectralField& b);

double mean(const SpectralField& f);

/// sum_x f(x) * dx^dim  (periodic trapezoid == spectral quadrature)
double integral(const SpectralField& f);

}  // namespace mslab
