#include "mslab/linear_flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "mslab/errors.hpp"
#include "mslab/kernels.hpp"
#include "mslab/norms.hpp"
#include "mslab/operators.hpp"

namespace mslab {

LinearPropagator make_propagator(GridPtr grid, double t) {
  if (!grid) throw config_error("make_propagator: null grid");
  if (t < 0.0)
    throw config_error(
        "make_propagator: t must be >= 0 (backward evolution goes through "
        "adjoint_evolve)");
  LinearPropagator p;
  p.grid = std::move(grid);
  p.t = t;
  const auto& km = p.grid->kmag;
  p.symbol.resize(km.size());
  for (std::size_t i = 0; i < km.size(); ++i)
    p.symbol[i] = std::exp(-2.0 * km[i] * km[i] * km[i] * t);
  return p;
}

SpectralField apply(const LinearPropagator& p, const SpectralField& f) {
  if (!f.grid().compatible(*p.grid))
    throw config_error("apply(propagator): field lives on a different grid");
  std::vector<cplx> c(f.coeffs().begin(), f.coeffs().end());
  kernels::cmul_real(c, c, p.symbol);
  return SpectralField::from_coeffs(f.grid_ptr(), std::move(c));
}

SpectralField evolve_linear(const SpectralField& h0, double t) {
  return apply(make_propagator(h0.grid_ptr(), t), h0);
}

SpectralField adjoint_evolve(const SpectralField& psi, double T, double t) {
  if (t < 0.0) throw config_error("adjoint_evolve: t must be >= 0");
  if (t > T)
    throw config_error("adjoint_evolve: t must not exceed the terminal time T");
  return evolve_linear(psi, T - t);
}

namespace {

// Periodized-symbol weights for one torus: the synthesis value at radius r is
// sum_j w[j] * cos(k[j] * r), where for dim == 2 the transverse index has
// already been summed into w.
struct SynthesisTable {
  std::vector<double> k;
  std::vector<double> w;
  double L = 0.0;
  double normalization = 0.0;  // L^dim * zero-mode coefficient

  double eval(double r) const {
    double s = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) s += w[j] * std::cos(k[j] * r);
    return s;
  }
};

SynthesisTable build_table(int dim, double L) {
  const double dx = 0.5;
  const int n = int(std::lround(L / dx));
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<double> k(n);
  for (int j = 0; j < n; ++j) {
    const int jj = j <= n / 2 ? j : j - n;
    k[j] = two_pi * double(jj) / L;
  }

  SynthesisTable tab;
  tab.k = k;
  tab.w.assign(n, 0.0);
  tab.L = L;

  if (dim == 1) {
    for (int j = 0; j < n; ++j) {
      const double a = std::abs(k[j]);
      tab.w[j] = std::exp(-2.0 * a * a * a) / L;
    }
  } else {
    const int threads = num_threads();
#pragma omp parallel for schedule(static) num_threads(threads) \
    if (threads > 1)
    for (int jx = 0; jx < n; ++jx) {
      double s = 0.0;
      const double kx2 = k[jx] * k[jx];
      for (int jy = 0; jy < n; ++jy) {
        const double m = std::sqrt(kx2 + k[jy] * k[jy]);
        s += std::exp(-2.0 * m * m * m);
      }
      tab.w[jx] = s / (L * L);
    }
  }
  // torus integral = L^dim * (zero-mode coefficient); for dim == 2 the
  // zero mode is one term of the already-summed column w[0]
  const double vol = dim == 1 ? L : L * L;
  const double c0 = std::exp(-2.0 * 0.0) / vol;
  tab.normalization = vol * c0;
  return tab;
}

}  // namespace

KernelProfile kernel_profile(int dim, double r_max, int n_samples,
                             double domain_hint) {
  if (dim != 1 && dim != 2)
    throw config_error("kernel_profile: dim must be 1 or 2");
  if (!(r_max > 0.0)) throw config_error("kernel_profile: r_max must be > 0");
  if (n_samples < 16)
    throw config_error("kernel_profile: need at least 16 samples");

  double L1 = domain_hint;
  if (L1 <= 0.0) {
    L1 = 512.0;
    while (L1 < 4.0 * r_max) L1 *= 2.0;
  } else {
    double p = 8.0;
    while (p < L1) p *= 2.0;
    if (p != L1)
      throw config_error("kernel_profile: domain_hint must be a power of two");
    if (L1 < 2.0 * r_max)
      throw config_error(
          "kernel_profile: domain_hint must cover the radii (L >= 2 r_max)");
  }

  const SynthesisTable tab1 = build_table(dim, L1);
  const SynthesisTable tab2 = build_table(dim, 2.0 * L1);

  KernelProfile p;
  p.dim = dim;
  p.domain = 2.0 * L1;
  p.grid_dx = 0.5;
  p.normalization = tab2.normalization;
  p.r.resize(n_samples);
  p.value.resize(n_samples);

  std::vector<double> v1(n_samples);
  const double dr = r_max / double(n_samples - 1);
  for (int i = 0; i < n_samples; ++i) {
    p.r[i] = dr * double(i);
    v1[i] = tab1.eval(p.r[i]);
    p.value[i] = tab2.eval(p.r[i]);
  }

  const int i0 = std::max(1, (9 * (n_samples - 1)) / 10);
  double num = 0.0, den = 0.0;
  for (int i = i0; i < n_samples; ++i) {
    num = std::max(num, std::abs(p.value[i] - v1[i]));
    den = std::max(den, std::abs(p.value[i]));
  }
  p.tail_drift = den > 0.0 ? num / den : 0.0;
  p.tail_converged = p.tail_drift <= 1e-4;

  for (int i = 1; i + 1 < n_samples; ++i) {
    const double d2 =
        std::abs(p.value[i + 1] - 2.0 * p.value[i] + p.value[i - 1]) /
        (dr * dr);
    p.max_second_diff = std::max(p.max_second_diff, d2);
  }
  return p;
}

void write_profile_csv(const KernelProfile& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("write_profile_csv: cannot open " + path);
  out << std::setprecision(17);
  out << "# kernel profile: d=" << p.dim << " domain=" << p.domain
      << " dx=" << p.grid_dx << " normalization=" << p.normalization
      << " tail_drift=" << p.tail_drift
      << " tail_converged=" << (p.tail_converged ? 1 : 0) << "\n";
  out << "r,value\n";
  for (std::size_t i = 0; i < p.r.size(); ++i)
    out << p.r[i] << "," << p.value[i] << "\n";
  if (!out) throw config_error("write_profile_csv: write failed for " + path);
}

namespace {

// sup over a log grid of offsets s = T - t of s^pow * ||multiplier(u)||,
// normalized by ||psi||_inf outside.
struct DualSup {
  double sup_u = 0.0, sup_v = 0.0, sup_gv = 0.0, sup_dzgv = 0.0;
};

DualSup dual_sups(const SpectralField& psi, double T, int s_points) {
  DualSup d;
  for (int i = 0; i < s_points; ++i) {
    const double s =
        T * std::pow(1e-4, 1.0 - double(i) / double(s_points - 1));
    const SpectralField u = evolve_linear(psi, s);
    const SpectralField v = apply_multiplier(u, 1.0);
    d.sup_u = std::max(d.sup_u, sup_norm(u));
    d.sup_v = std::max(d.sup_v, std::cbrt(s) * sup_norm(v));
    d.sup_gv = std::max(d.sup_gv, std::cbrt(s) * std::cbrt(s) * grad_sup(v));
    d.sup_dzgv =
        std::max(d.sup_dzgv, s * grad_sup(apply_multiplier(u, 2.0)));
  }
  return d;
}

// sup over an (r, theta) fan of r^dim * |ubar| for the harmonic extension of
// u(0); x is snapped to the nearest node and the radius recomputed.
double tail_sup(const SpectralField& u0, double r_lo, double r_hi) {
  const TorusGrid& g = u0.grid();
  const double c = g.L / 2.0;
  double best = 0.0;
  for (int it = 0; it <= 5; ++it) {
    const double theta = double(it) * (15.0 * std::numbers::pi / 180.0);
    for (int ir = 0; ir < 12; ++ir) {
      const double r = r_lo + (r_hi - r_lo) * double(ir) / 11.0;
      const double z = r * std::sin(theta);
      const SpectralField ub = poisson_extend(u0, z);
      const double xoff = r * std::cos(theta);
      const int ix = int(std::lround((c + xoff) / g.dx));
      const double xs = g.dx * double(ix) - c;
      const double rs = std::sqrt(xs * xs + z * z);
      double val;
      if (g.dim == 1) {
        val = ub.values()[std::size_t(ix % g.n)];
      } else {
        const int iy = g.n / 2;
        val = ub.values()[std::size_t(iy) * std::size_t(g.n) +
                          std::size_t(ix % g.n)];
      }
      const double w = g.dim == 1 ? rs : rs * rs;
      best = std::max(best, w * std::abs(val));
    }
  }
  return best;
}

}  // namespace

LinearBoundsReport verify_linear_bounds(const std::vector<SpectralField>& family,
                                        const std::vector<double>& T_grid) {
  if (T_grid.empty())
    throw config_error("verify_linear_bounds: empty terminal-time grid");
  for (double T : T_grid)
    if (!(T > 0.0))
      throw config_error("verify_linear_bounds: terminal times must be > 0");

  LinearBoundsReport rep;
  rep.T_grid = T_grid;
  rep.rows.resize(5);
  rep.rows[0].name = "sup_u";
  rep.rows[1].name = "sup_v";
  rep.rows[2].name = "sup_grad_v";
  rep.rows[3].name = "sup_dz_grad_v";
  rep.rows[4].name = "spatial_tail";
  for (auto& row : rep.rows) row.constant.assign(T_grid.size(), 0.0);

  const int s_points = 400;
  for (std::size_t iT = 0; iT < T_grid.size(); ++iT) {
    for (const SpectralField& psi : family) {
      const double amp = sup_norm(psi);
      if (!(amp > 0.0)) continue;
      const DualSup d = dual_sups(psi, T_grid[iT], s_points);
      rep.rows[0].constant[iT] = std::max(rep.rows[0].constant[iT], d.sup_u / amp);
      rep.rows[1].constant[iT] = std::max(rep.rows[1].constant[iT], d.sup_v / amp);
      rep.rows[2].constant[iT] = std::max(rep.rows[2].constant[iT], d.sup_gv / amp);
      rep.rows[3].constant[iT] =
          std::max(rep.rows[3].constant[iT], d.sup_dzgv / amp);
    }
  }

  // Localized terminal datum for the spatial-tail row: a centered bump whose
  // width scales with the domain so the fan radii stay inside the torus.
  if (!family.empty()) {
    const GridPtr g = family.front().grid_ptr();
    const double sigma = std::max(g->L / 64.0, 4.0 * g->dx);
    std::vector<double> bump(g->size());
    const double c = g->L / 2.0;
    if (g->dim == 1) {
      for (int i = 0; i < g->n; ++i) {
        const double x = g->x(i) - c;
        bump[std::size_t(i)] = std::exp(-x * x / (2.0 * sigma * sigma));
      }
    } else {
      for (int iy = 0; iy < g->n; ++iy)
        for (int ix = 0; ix < g->n; ++ix) {
          const double x = g->x(ix) - c, y = g->x(iy) - c;
          bump[std::size_t(iy) * std::size_t(g->n) + std::size_t(ix)] =
              std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
        }
    }
    const SpectralField psi_loc = SpectralField::from_values(g, std::move(bump));
    for (std::size_t iT = 0; iT < T_grid.size(); ++iT) {
      const SpectralField u0 = adjoint_evolve(psi_loc, T_grid[iT], 0.0);
      rep.rows[4].constant[iT] =
          tail_sup(u0, 0.15 * g->L, 0.4 * g->L) / sup_norm(psi_loc);
    }
  }

  for (auto& row : rep.rows) {
    double lo = row.constant[0], hi = row.constant[0];
    for (double c : row.constant) {
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    if (hi == 0.0) {
      row.variation = 1.0;
    } else if (lo == 0.0) {
      row.variation = std::numeric_limits<double>::infinity();
    } else {
      row.variation = hi / lo;
    }
    row.bounded = row.variation <= 2.0;
  }
  return rep;
}

}  // namespace mslab
