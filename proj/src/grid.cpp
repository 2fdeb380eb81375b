#include "mslab/grid.hpp"

#include <cmath>
#include <string>

#include "mslab/errors.hpp"

namespace mslab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

GridPtr make_grid(int dim, int n, double L) {
  if (dim != 1 && dim != 2)
    throw config_error("grid: dim must be 1 or 2, got " + std::to_string(dim));
  if (!power_of_two(n) || n < 8)
    throw config_error("grid: n must be a power of two >= 8, got " + std::to_string(n));
  if (!(L > 0.0) || !std::isfinite(L))
    throw config_error("grid: period L must be positive and finite");

  auto g = std::make_shared<TorusGrid>();
  g->dim = dim;
  g->n = n;
  g->L = L;
  g->dx = L / n;

  g->k1.resize(std::size_t(n));
  for (int j = 0; j < n; ++j) {
    const int jj = (j <= n / 2) ? j : j - n;
    g->k1[std::size_t(j)] = kTwoPi * jj / L;
  }

  const int third = n / 3;  // 2/3 rule: keep |jj| <= floor(n/3)
  auto keep1 = [&](int j) {
    const int jj = (j <= n / 2) ? j : j - n;
    return std::abs(jj) <= third;
  };

  g->kmag.resize(g->size());
  g->keep23.resize(g->size());
  if (dim == 1) {
    for (int j = 0; j < n; ++j) {
      g->kmag[std::size_t(j)] = std::fabs(g->k1[std::size_t(j)]);
      g->keep23[std::size_t(j)] = keep1(j) ? 1 : 0;
    }
  } else {
    for (int jx = 0; jx < n; ++jx) {
      const double kx = g->k1[std::size_t(jx)];
      for (int jy = 0; jy < n; ++jy) {
        const double ky = g->k1[std::size_t(jy)];
        const std::size_t i = std::size_t(jx) * n + jy;
        g->kmag[i] = std::hypot(kx, ky);
        g->keep23[i] = (keep1(jx) && keep1(jy)) ? 1 : 0;
      }
    }
  }
  return g;
}

}  // namespace mslab
