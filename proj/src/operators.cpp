#include "mslab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mslab/errors.hpp"
#include "mslab/kernels.hpp"

namespace mslab {

SpectralField apply_multiplier(const SpectralField& f, double alpha) {
  if (alpha < -1.0)
    throw config_error("apply_multiplier: alpha < -1 not locally integrable, got " +
                       std::to_string(alpha));
  const TorusGrid& g = f.grid();
  const auto in = f.coeffs();
  std::vector<cplx> out(g.size());
  if (alpha == 0.0) {
    std::copy(in.begin(), in.end(), out.begin());
    return SpectralField::from_coeffs(f.grid_ptr(), std::move(out));
  }
  std::vector<double> m(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    m[i] = (g.kmag[i] > 0.0) ? std::pow(g.kmag[i], alpha) : 0.0;
  kernels::cmul_real(out, in, m);
  return SpectralField::from_coeffs(f.grid_ptr(), std::move(out));
}

SpectralField derivative(const SpectralField& f, int axis) {
  const TorusGrid& g = f.grid();
  if (axis < 0 || axis >= g.dim)
    throw config_error("derivative: axis out of range for dim " + std::to_string(g.dim));
  const auto in = f.coeffs();
  const int n = g.n;
  std::vector<cplx> out(g.size());
  if (g.dim == 1) {
    for (int j = 0; j < n; ++j) {
      const double k = (j == n / 2) ? 0.0 : g.k1[std::size_t(j)];
      out[std::size_t(j)] = in[std::size_t(j)] * cplx(0.0, k);
    }
  } else {
    for (int jx = 0; jx < n; ++jx)
      for (int jy = 0; jy < n; ++jy) {
        const int ja = (axis == 0) ? jx : jy;
        const double k = (ja == n / 2) ? 0.0 : g.k1[std::size_t(ja)];
        const std::size_t i = std::size_t(jx) * n + jy;
        out[i] = in[i] * cplx(0.0, k);
      }
  }
  return SpectralField::from_coeffs(f.grid_ptr(), std::move(out));
}

std::vector<SpectralField> gradient(const SpectralField& f) {
  std::vector<SpectralField> out;
  out.reserve(std::size_t(f.grid().dim));
  for (int a = 0; a < f.grid().dim; ++a) out.push_back(derivative(f, a));
  return out;
}

SpectralField laplacian(const SpectralField& f) {
  const TorusGrid& g = f.grid();
  const auto in = f.coeffs();
  std::vector<double> m(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) m[i] = -g.kmag[i] * g.kmag[i];
  std::vector<cplx> out(g.size());
  kernels::cmul_real(out, in, m);
  return SpectralField::from_coeffs(f.grid_ptr(), std::move(out));
}

SpectralField poisson_extend(const SpectralField& f, double z) {
  if (!(z >= 0.0))
    throw config_error("poisson_extend: height z must be >= 0, got " + std::to_string(z));
  const TorusGrid& g = f.grid();
  const auto in = f.coeffs();
  std::vector<double> m(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) m[i] = std::exp(-g.kmag[i] * z);
  std::vector<cplx> out(g.size());
  kernels::cmul_real(out, in, m);
  return SpectralField::from_coeffs(f.grid_ptr(), std::move(out));
}

void dealias(SpectralField& f) {
  const TorusGrid& g = f.grid();
  auto& c = f.mutable_coeffs();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!g.keep23[i]) c[i] = {0.0, 0.0};
}

SpectralField multiply_dealiased(const SpectralField& a, const SpectralField& b) {
  if (!a.grid().compatible(b.grid()))
    throw config_error("multiply: mixed-grid operands");
  std::vector<double> v(a.grid().size());
  kernels::mul(v, a.values(), b.values());
  SpectralField out = SpectralField::from_values(a.grid_ptr(), std::move(v));
  dealias(out);
  return out;
}

double mean(const SpectralField& f) { return f.coeff0(); }

double integral(const SpectralField& f) {
  return kernels::sum(f.values()) * f.grid().cell();
}

}  // namespace mslab
