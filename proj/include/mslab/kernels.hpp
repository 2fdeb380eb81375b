#pragma once

#include <complex>
#include <cstddef>
#include <span>

// Hot data-parallel loops, OpenMP-parallel in mslab::kernels with serial
// twins in mslab::ref.  Tests pin kernels == ref exactly; tools/bench_kernels
// compares their throughput.  Reductions use a fixed block decomposition with
// a serial combine so results do not depend on the thread count.

namespace mslab {

/// Set the worker-thread count for the parallel kernels (clamped to
/// [1, hardware]).  Returns the value in effect.  0 keeps the current value.
int set_num_threads(int n);
int num_threads();

using cplx = std::complex<double>;

namespace kernels {

/// out[i] = in[i] * m[i]  (coefficient-space multiplier application)
void cmul_real(std::span<cplx> out, std::span<const cplx> in, std::span<const double> m);

/// out[i] = a[i] * b[i]
void mul(std::span<double> out, std::span<const double> a, std::span<const double> b);

/// out[i] = sqrt(1 + g0[i]^2)           (interface metric, one slope field)
void metric_1(std::span<double> out, std::span<const double> g0);

/// out[i] = sqrt(1 + g0[i]^2 + g1[i]^2) (interface metric, two slope fields)
void metric_2(std::span<double> out, std::span<const double> g0, std::span<const double> g1);

/// out[i] = a[i] / w[i]
void div_by(std::span<double> out, std::span<const double> a, std::span<const double> w);

/// y[i] += a * x[i]
void axpy(std::span<double> y, double a, std::span<const double> x);

/// blocked deterministic reductions
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> v);
double max_abs(std::span<const double> v);

/// sum_i |v[i]|^p * w[i]   (w may be empty for unit weight)
double weighted_pow_sum(std::span<const double> v, double p, std::span<const double> w);

/// Nine-point tensor-product stencil on a strip grid: periodic in x
/// (column index j, n columns), z levels m = 0..mz with level 0 held as
/// Dirichlet data and a free top row at m = mz.  All couplings are
/// z-independent (the coefficients come from an x-dependent shear), so one
/// weight per column suffices; the top row carries its own same-level
/// weights because only the cells below it exist.
struct Stencil9 {
  int n = 0;   // x points per level
  int mz = 0;  // levels 1..mz are unknowns
  // same-level couplings for interior rows: diagonal, to j-1, to j+1
  std::span<const double> c0, cl, cr;
  // couplings from level m to m+1: center, to j-1, to j+1
  std::span<const double> u0, ul, ur;
  // couplings from level m to m-1: center, to j-1, to j+1
  std::span<const double> d0, dl, dr;
  // same-level couplings for the top row m == mz
  std::span<const double> t0, tl, tr;
};

/// y = A x with level 0 treated as given data: x and y hold levels 1..mz
/// contiguously (size n*mz, x fastest), bottom holds the n level-0 values.
/// Pass a zero `bottom` to get the pure unknown-to-unknown action for CG.
void stencil9_apply(const Stencil9& st, std::span<const double> x,
                    std::span<const double> bottom, std::span<double> y);

}  // namespace kernels

namespace ref {
void cmul_real(std::span<cplx> out, std::span<const cplx> in, std::span<const double> m);
void mul(std::span<double> out, std::span<const double> a, std::span<const double> b);
void metric_1(std::span<double> out, std::span<const double> g0);
void metric_2(std::span<double> out, std::span<const double> g0, std::span<const double> g1);
void div_by(std::span<double> out, std::span<const double> a, std::span<const double> w);
void axpy(std::span<double> y, double a, std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> v);
double max_abs(std::span<const double> v);
double weighted_pow_sum(std::span<const double> v, double p, std::span<const double> w);
void stencil9_apply(const kernels::Stencil9& st, std::span<const double> x,
                    std::span<const double> bottom, std::span<double> y);
}  // namespace ref

}  // namespace mslab
