#include "mslab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mslab {

namespace {
int g_threads = 1;

// Reductions accumulate fixed-size blocks serially and combine the partial
// sums in index order, so the result is identical for any thread count.
constexpr std::ptrdiff_t kBlock = 8192;
}  // namespace

int set_num_threads(int n) {
  if (n > 0) {
#ifdef _OPENMP
    g_threads = std::min(n, 256);  // oversubscription allowed; results identical
#else
    g_threads = 1;
#endif
  }
  return g_threads;
}

int num_threads() { return g_threads; }

// ============================================================================
// parallel kernels
// ============================================================================

namespace kernels {

void cmul_real(std::span<cplx> out, std::span<const cplx> in, std::span<const double> m) {
  const std::ptrdiff_t n = std::ptrdiff_t(out.size());
#pragma omp parallel for schedule(static) num_threads(g_threads) if (g_threads > 1 && n > 4096)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = in[i] * m[i];
}

void mul(std::span<double> out, std::span<const double> a, std::span<const double> b) {
  const std::ptrdiff_t n = std::ptrdiff_t(out.size());
#pragma omp parallel for schedule(static) num_threads(g_threads) if (g_threads > 1 && n > 4096)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void metric_1(std::span<double> out, std::span<const double> g0) {
  const std::ptrdiff_t n = std::ptrdiff_t(out.size());
#pragma omp parallel for schedule(static) num_threads(g_threads) if (g_threads > 1 && n > 4096)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = std::sqrt(1.0 + g0[i] * g0[i]);
}

void metric_2(std::span<double> out, std::span<const double> g0, std::span<const double> g1) {
  const std::ptrdiff_t n = std::ptrdiff_t(out.size());
#pragma omp parallel for schedule(static) num_threads(g_threads) if (g_threads > 1 && n > 4096)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[i] = std::sqrt(1.0 + g0[i] * g0[i] + g1[i] * g1[i]);
}

void div_by(std::span<double> out, std::span<const double> a, std::span<const double> w) {
  const std::ptrdiff_t n = std::ptrdiff_t(out.size());
#pragma omp parallel for schedule(static) num_threads(g_threads) if (g_threads > 1 && n > 4096)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = a[i] / w[i];
}

void axpy(std::span<double> y, double a, std::span<const double> x) {
  const std::ptrdiff_t n = std::ptrdiff_t(y.size());
#pragma omp parallel for schedule(static) num_threads(g_threads) if (g_threads > 1 && n > 4096)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::ptrdiff_t n = std::ptrdiff_t(a.size());
  const std::ptrdiff_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(std::size_t(nb), 0.0);
#pragma omp parallel for schedule(static) num_threads(g_threads) if (g_threads > 1 && nb > 1)
  for (std::ptrdiff_t ib = 0; ib < nb; ++ib) {
    const std::ptrdiff_t lo = ib * kBlock, hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) s += a[i] * b[i];
    partial[std::size_t(ib)] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double sum(std::span<const double> v) {
  const std::ptrdiff_t n = std::ptrdiff_t(v.size());
  const std::ptrdiff_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(std::size_t(nb), 0.0);
#pragma omp parallel for schedule(static) num_threads(g_threads) if (g_threads > 1 && nb > 1)
  for (std::ptrdiff_t ib = 0; ib < nb; ++ib) {
    const std::ptrdiff_t lo = ib * kBlock, hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) s += v[i];
    partial[std::size_t(ib)] = s;
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

double max_abs(std::span<const double> v) {
  const std::ptrdiff_t n = std::ptrdiff_t(v.size());
  double m = 0.0;
#pragma omp parallel for schedule(static) reduction(max : m) num_threads(g_threads) \
    if (g_threads > 1 && n > 8192)
  for (std::ptrdiff_t i = 0; i < n; ++i) m = std::max(m, std::fabs(v[i]));
  return m;
}

double weighted_pow_sum(std::span<const double> v, double p, std::span<const double> w) {
  const std::ptrdiff_t n = std::ptrdiff_t(v.size());
  const std::ptrdiff_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(std::size_t(nb), 0.0);
#pragma omp parallel for schedule(static) num_threads(g_threads) if (g_threads > 1 && nb > 1)
  for (std::ptrdiff_t ib = 0; ib < nb; ++ib) {
    const std::ptrdiff_t lo = ib * kBlock, hi = std::min(n, lo + kBlock);
    double s = 0.0;
    if (w.empty()) {
      for (std::ptrdiff_t i = lo; i < hi; ++i) s += std::pow(std::fabs(v[i]), p);
    } else {
      for (std::ptrdiff_t i = lo; i < hi; ++i) s += std::pow(std::fabs(v[i]), p) * w[i];
    }
    partial[std::size_t(ib)] = s;
  }
  double s = 0.0;
  for (double q : partial) s += q;
  return s;
}

namespace {

// One output row of the 9-point sweep; lvl pointers may be null (absent).
inline void stencil_row(const kernels::Stencil9& st, const double* below, const double* same,
                        const double* above, bool top, double* y) {
  const int n = st.n;
  const double* c0 = top ? st.t0.data() : st.c0.data();
  const double* cl = top ? st.tl.data() : st.cl.data();
  const double* cr = top ? st.tr.data() : st.cr.data();
  for (int j = 0; j < n; ++j) {
    const int jm = (j == 0) ? n - 1 : j - 1;
    const int jp = (j == n - 1) ? 0 : j + 1;
    double acc = c0[j] * same[j] + cl[j] * same[jm] + cr[j] * same[jp];
    if (below) acc += st.d0[j] * below[j] + st.dl[j] * below[jm] + st.dr[j] * below[jp];
    if (above) acc += st.u0[j] * above[j] + st.ul[j] * above[jm] + st.ur[j] * above[jp];
    y[j] = acc;
  }
}

}  // namespace

void stencil9_apply(const Stencil9& st, std::span<const double> x,
                    std::span<const double> bottom, std::span<double> y) {
  const int n = st.n, mz = st.mz;
#pragma omp parallel for schedule(static) num_threads(g_threads) if (g_threads > 1 && mz > 8)
  for (int m = 1; m <= mz; ++m) {
    const double* same = x.data() + std::size_t(m - 1) * n;
    const double* below = (m == 1) ? bottom.data() : x.data() + std::size_t(m - 2) * n;
    const double* above = (m == mz) ? nullptr : x.data() + std::size_t(m) * n;
    stencil_row(st, below, same, above, m == mz, y.data() + std::size_t(m - 1) * n);
  }
}

}  // namespace kernels

// ============================================================================
// serial reference twins
// ============================================================================

namespace ref {

void cmul_real(std::span<cplx> out, std::span<const cplx> in, std::span<const double> m) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] * m[i];
}

void mul(std::span<double> out, std::span<const double> a, std::span<const double> b) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
}

void metric_1(std::span<double> out, std::span<const double> g0) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(1.0 + g0[i] * g0[i]);
}

void metric_2(std::span<double> out, std::span<const double> g0, std::span<const double> g1) {
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::sqrt(1.0 + g0[i] * g0[i] + g1[i] * g1[i]);
}

void div_by(std::span<double> out, std::span<const double> a, std::span<const double> w) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] / w[i];
}

void axpy(std::span<double> y, double a, std::span<const double> x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::ptrdiff_t n = std::ptrdiff_t(a.size());
  double total = 0.0;
  for (std::ptrdiff_t lo = 0; lo < n; lo += kBlock) {
    const std::ptrdiff_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) s += a[i] * b[i];
    total += s;
  }
  return total;
}

double sum(std::span<const double> v) {
  const std::ptrdiff_t n = std::ptrdiff_t(v.size());
  double total = 0.0;
  for (std::ptrdiff_t lo = 0; lo < n; lo += kBlock) {
    const std::ptrdiff_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) s += v[i];
    total += s;
  }
  return total;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double weighted_pow_sum(std::span<const double> v, double p, std::span<const double> w) {
  const std::ptrdiff_t n = std::ptrdiff_t(v.size());
  double total = 0.0;
  for (std::ptrdiff_t lo = 0; lo < n; lo += kBlock) {
    const std::ptrdiff_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    if (w.empty()) {
      for (std::ptrdiff_t i = lo; i < hi; ++i) s += std::pow(std::fabs(v[i]), p);
    } else {
      for (std::ptrdiff_t i = lo; i < hi; ++i) s += std::pow(std::fabs(v[i]), p) * w[i];
    }
    total += s;
  }
  return total;
}

void stencil9_apply(const kernels::Stencil9& st, std::span<const double> x,
                    std::span<const double> bottom, std::span<double> y) {
  const int n = st.n, mz = st.mz;
  for (int m = 1; m <= mz; ++m) {
    const bool top = (m == mz);
    const double* same = x.data() + std::size_t(m - 1) * n;
    const double* below = (m == 1) ? bottom.data() : x.data() + std::size_t(m - 2) * n;
    const double* above = top ? nullptr : x.data() + std::size_t(m) * n;
    double* out = y.data() + std::size_t(m - 1) * n;
    const double* c0 = top ? st.t0.data() : st.c0.data();
    const double* cl = top ? st.tl.data() : st.cl.data();
    const double* cr = top ? st.tr.data() : st.cr.data();
    for (int j = 0; j < n; ++j) {
      const int jm = (j == 0) ? n - 1 : j - 1;
      const int jp = (j == n - 1) ? 0 : j + 1;
      double acc = c0[j] * same[j] + cl[j] * same[jm] + cr[j] * same[jp];
      acc += st.d0[j] * below[j] + st.dl[j] * below[jm] + st.dr[j] * below[jp];
      if (above) acc += st.u0[j] * above[j] + st.ul[j] * above[jm] + st.ur[j] * above[jp];
      out[j] = acc;
    }
  }
}

}  // namespace ref
}  // namespace mslab
