#include "mslab/norms.hpp"

#include <cmath>

#include "mslab/errors.hpp"
#include "mslab/kernels.hpp"
#include "mslab/operators.hpp"

namespace mslab {

double lp_norm(const SpectralField& f, double p) {
  if (!(p >= 1.0)) throw config_error("lp_norm: p must be >= 1");
  const double s = kernels::weighted_pow_sum(f.values(), p, {});
  return std::pow(s * f.grid().cell(), 1.0 / p);
}

double l1_norm(const SpectralField& f) { return lp_norm(f, 1.0); }

double l2_norm(const SpectralField& f) {
  return std::sqrt(kernels::dot(f.values(), f.values()) * f.grid().cell());
}

double sup_norm(const SpectralField& f) { return kernels::max_abs(f.values()); }

double sobolev_sq(const SpectralField& f, double s) {
  const TorusGrid& g = f.grid();
  const auto c = f.coeffs();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.kmag[i] == 0.0) continue;
    acc += std::pow(g.kmag[i], 2.0 * s) * std::norm(c[i]);
  }
  return acc * g.volume();
}

double grad_sup(const SpectralField& f) {
  const auto gr = gradient(f);
  if (f.grid().dim == 1) return kernels::max_abs(gr[0].values());
  const auto gx = gr[0].values();
  const auto gy = gr[1].values();
  double m = 0.0;
  for (std::size_t i = 0; i < gx.size(); ++i)
    m = std::max(m, gx[i] * gx[i] + gy[i] * gy[i]);
  return std::sqrt(m);
}

double grad_lp(const SpectralField& f, double p) {
  const auto gr = gradient(f);
  if (f.grid().dim == 1) return lp_norm(gr[0], p);
  const auto gx = gr[0].values();
  const auto gy = gr[1].values();
  std::vector<double> mag(gx.size());
  for (std::size_t i = 0; i < gx.size(); ++i)
    mag[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
  const double s = kernels::weighted_pow_sum(mag, p, {});
  return std::pow(s * f.grid().cell(), 1.0 / p);
}

double grad_l2_sq(const SpectralField& f) { return sobolev_sq(f, 1.0); }

double hessian_l2_sq(const SpectralField& f) { return sobolev_sq(f, 2.0); }

}  // namespace mslab
