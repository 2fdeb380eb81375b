// Throughput comparison of the OpenMP kernels against their serial reference
// twins.  Usage: bench_kernels [threads] [size]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "mslab/kernels.hpp"
#include "mslab/rng.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double time_of(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto t0 = clock_type::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = clock_type::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

void row(const char* name, double serial_s, double parallel_s, double items) {
  std::printf("%-22s %10.3f ms %10.3f ms %8.2fx %10.1f M/s\n", name, serial_s * 1e3,
              parallel_s * 1e3, serial_s / parallel_s, items / parallel_s * 1e-6);
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = (argc > 1) ? std::atoi(argv[1]) : 0;
  const std::size_t n = (argc > 2) ? std::size_t(std::atoll(argv[2])) : (1u << 22);
  const int used = mslab::set_num_threads(threads > 0 ? threads : 4);
  std::printf("threads=%d, n=%zu\n", used, n);
  std::printf("%-22s %13s %13s %9s %12s\n", "kernel", "serial", "parallel", "speedup",
              "throughput");

  mslab::Rng rng(12345);
  std::vector<double> a(n), b(n), w(n), out(n);
  std::vector<mslab::cplx> ca(n), cout(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.normal();
    b[i] = rng.normal();
    w[i] = 1.0 + rng.uniform();
    ca[i] = {rng.normal(), rng.normal()};
  }

  const int reps = 20;
  row("cmul_real",
      time_of([&] { mslab::ref::cmul_real(cout, ca, w); }, reps),
      time_of([&] { mslab::kernels::cmul_real(cout, ca, w); }, reps), double(n));
  row("mul",
      time_of([&] { mslab::ref::mul(out, a, b); }, reps),
      time_of([&] { mslab::kernels::mul(out, a, b); }, reps), double(n));
  row("metric_2",
      time_of([&] { mslab::ref::metric_2(out, a, b); }, reps),
      time_of([&] { mslab::kernels::metric_2(out, a, b); }, reps), double(n));
  row("axpy",
      time_of([&] { mslab::ref::axpy(out, 0.5, a); }, reps),
      time_of([&] { mslab::kernels::axpy(out, 0.5, a); }, reps), double(n));
  row("dot",
      time_of([&] { (void)mslab::ref::dot(a, b); }, reps),
      time_of([&] { (void)mslab::kernels::dot(a, b); }, reps), double(n));
  row("weighted_pow_sum p=4",
      time_of([&] { (void)mslab::ref::weighted_pow_sum(a, 4.0, w); }, reps),
      time_of([&] { (void)mslab::kernels::weighted_pow_sum(a, 4.0, w); }, reps), double(n));

  // strip stencil: 512 columns, 2048 levels
  const int sn = 512, mz = 2048;
  std::vector<double> c0(sn, 4.0), cl(sn, -1.0), cr(sn, -1.0), u0(sn, -0.5), ul(sn, -0.1),
      ur(sn, -0.1), d0(sn, -0.5), dl(sn, -0.1), dr(sn, -0.1), t0(sn, 2.0), tl(sn, -0.5),
      tr(sn, -0.5);
  mslab::kernels::Stencil9 st{sn, mz, c0, cl, cr, u0, ul, ur, d0, dl, dr, t0, tl, tr};
  std::vector<double> x(std::size_t(sn) * mz, 1.0), y(x.size()), bottomv(sn, 0.5);
  row("stencil9_apply",
      time_of([&] { mslab::ref::stencil9_apply(st, x, bottomv, y); }, 5),
      time_of([&] { mslab::kernels::stencil9_apply(st, x, bottomv, y); }, 5),
      double(x.size()));
  return 0;
}
