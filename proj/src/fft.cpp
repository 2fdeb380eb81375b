#include "mslab/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace mslab::fft {

namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex g_mutex;
std::map<std::pair<int, int>, PlanPair>& plan_cache() {
  static auto* cache = new std::map<std::pair<int, int>, PlanPair>();
  return *cache;
}

const PlanPair& plans_for(const TorusGrid& g) {
  std::lock_guard<std::mutex> lock(g_mutex);
  auto& cache = plan_cache();
  auto it = cache.find({g.dim, g.n});
  if (it != cache.end()) return it->second;

  const std::size_t sz = g.size();
  fftw_complex* a = fftw_alloc_complex(sz);
  fftw_complex* b = fftw_alloc_complex(sz);
  PlanPair p;
  // FFTW_UNALIGNED lets the plans run on arbitrary caller buffers.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  if (g.dim == 1) {
    p.fwd = fftw_plan_dft_1d(g.n, a, b, FFTW_FORWARD, flags);
    p.bwd = fftw_plan_dft_1d(g.n, a, b, FFTW_BACKWARD, flags);
  } else {
    p.fwd = fftw_plan_dft_2d(g.n, g.n, a, b, FFTW_FORWARD, flags);
    p.bwd = fftw_plan_dft_2d(g.n, g.n, a, b, FFTW_BACKWARD, flags);
  }
  fftw_free(a);
  fftw_free(b);
  return cache.emplace(std::make_pair(g.dim, g.n), p).first->second;
}

}  // namespace

void forward(const TorusGrid& g, const std::complex<double>* in, std::complex<double>* out) {
  const PlanPair& p = plans_for(g);
  fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  const double inv = 1.0 / double(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] *= inv;
}

void inverse(const TorusGrid& g, const std::complex<double>* in, std::complex<double>* out) {
  const PlanPair& p = plans_for(g);
  fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace mslab::fft
