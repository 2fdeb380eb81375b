#pragma once

#include <complex>

#include "mslab/grid.hpp"

namespace mslab::fft {

/// Normalized forward transform: out[j] = (1/n^dim) * sum_x in[x] e^{-i k_j x}.
/// Plans (FFTW, estimate mode for run-to-run determinism) are cached per
/// (dim, n) and shared read-only; execution on caller buffers is thread-safe.
/// in and out must be distinct buffers of size grid.size().
void forward(const TorusGrid& g, const std::complex<double>* in, std::complex<double>* out);

/// Unnormalized inverse: out[x] = sum_j in[j] e^{+i k_j x}.
void inverse(const TorusGrid& g, const std::complex<double>* in, std::complex<double>* out);

}  // namespace mslab::fft
