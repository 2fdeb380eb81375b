#pragma once

#include <span>

#include "mslab/spectral_field.hpp"

namespace mslab {

// Norm conventions used throughout:
//   ||f||_p^p           = sum_x |f(x)|^p dx^dim           (grid quadrature)
//   ||f||_Hs^2 (homog.) = L^dim * sum_k |k|^{2s} |c_k|^2  (series Parseval)
// With the 1/n^dim forward normalization these agree:  ||f||_2^2 == L^dim
// sum |c_k|^2 to rounding.

double lp_norm(const SpectralField& f, double p);
double l1_norm(const SpectralField& f);
double l2_norm(const SpectralField& f);
double sup_norm(const SpectralField& f);

/// homogeneous Sobolev seminorm squared, s >= 0
double sobolev_sq(const SpectralField& f, double s);

/// || |grad f| ||_inf (pointwise Euclidean magnitude of the gradient)
double grad_sup(const SpectralField& f);

/// || |grad f| ||_p
double grad_lp(const SpectralField& f, double p);

double grad_l2_sq(const SpectralField& f);

/// || D^2 f ||_{L^2}^2 = L^dim sum |k|^4 |c_k|^2
double hessian_l2_sq(const SpectralField& f);

}  // namespace mslab
