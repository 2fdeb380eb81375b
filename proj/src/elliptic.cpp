#include "mslab/elliptic.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <utility>

#include "mslab/errors.hpp"
#include "mslab/fft.hpp"
#include "mslab/functionals.hpp"
#include "mslab/kernels.hpp"
#include "mslab/norms.hpp"
#include "mslab/operators.hpp"

namespace mslab {

namespace {

using Elem = std::array<std::array<double, 4>, 4>;

// Stiffness of one dx-by-dz bilinear cell for the sheared coefficient matrix
// [[1, b], [b, 1 + b^2]], integrated with 2x2 Gauss points (exact for these
// integrands).  Local node order: (0,0), (1,0), (0,1), (1,1).
Elem element_matrix(double b, double dx, double dz) {
  Elem K{};
  const double q = 0.5 / std::sqrt(3.0);
  const double beta = 1.0 + b * b;
  for (double xi : {0.5 - q, 0.5 + q}) {
    for (double eta : {0.5 - q, 0.5 + q}) {
      const double dxi[4] = {-(1.0 - eta), 1.0 - eta, -eta, eta};
      const double deta[4] = {-(1.0 - xi), -xi, 1.0 - xi, xi};
      for (int a = 0; a < 4; ++a) {
        const double ax = dxi[a] / dx, az = deta[a] / dz;
        for (int c = 0; c < 4; ++c) {
          const double cx = dxi[c] / dx, cz = deta[c] / dz;
          K[a][c] += 0.25 * dx * dz * (ax * cx + b * (ax * cz + az * cx) + beta * az * cz);
        }
      }
    }
  }
  return K;
}

// Assembled column weights for one phase.  The shear is constant along z, so
// a single set of per-column weights describes every level; the interface row
// keeps its own same-level weights for flux recovery.
struct PhaseOp {
  int n = 0, m = 0;
  std::vector<double> c0, cl, cr, u0, ul, ur, d0, dl, dr, t0, tl, tr;
  std::vector<double> f0, fl, fr;

  kernels::Stencil9 stencil() const {
    return {n, m, c0, cl, cr, u0, ul, ur, d0, dl, dr, t0, tl, tr};
  }
};

PhaseOp build_phase(int n, int m, double dx, double dz, const std::vector<double>& shear) {
  std::vector<Elem> cell(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) cell[std::size_t(j)] = element_matrix(shear[std::size_t(j)], dx, dz);

  PhaseOp op;
  op.n = n;
  op.m = m;
  for (auto* v : {&op.c0, &op.cl, &op.cr, &op.u0, &op.ul, &op.ur, &op.d0, &op.dl, &op.dr,
                  &op.t0, &op.tl, &op.tr, &op.f0, &op.fl, &op.fr})
    v->resize(static_cast<std::size_t>(n));

  for (int j = 0; j < n; ++j) {
    const Elem& L = cell[std::size_t((j + n - 1) % n)];
    const Elem& R = cell[std::size_t(j)];
    const auto js = std::size_t(j);
    op.cl[js] = L[1][0] + L[3][2];
    op.cr[js] = R[0][1] + R[2][3];
    op.c0[js] = L[1][1] + R[0][0] + L[3][3] + R[2][2];
    op.ul[js] = L[1][2];
    op.u0[js] = L[1][3] + R[0][2];
    op.ur[js] = R[0][3];
    op.dl[js] = L[3][0];
    op.d0[js] = L[3][1] + R[2][0];
    op.dr[js] = R[2][1];
    op.tl[js] = L[3][2];
    op.t0[js] = L[3][3] + R[2][2];
    op.tr[js] = R[2][3];
    op.fl[js] = L[1][0];
    op.f0[js] = L[1][1] + R[0][0];
    op.fr[js] = R[0][1];
  }
  return op;
}

// Exact solver for the unsheared (b == 0) operator, used as the CG
// preconditioner: DFT along x decouples the columns into real tridiagonal
// systems in z, factored once per wavenumber.
class FlatSolver {
 public:
  FlatSolver(GridPtr gx, int m, double dz)
      : gx_(std::move(gx)), n_(gx_->n), m_(m), off_(std::size_t(n_)) {
    const std::size_t nm = std::size_t(n_) * std::size_t(m_);
    cp_.resize(nm);
    inv_piv_.resize(nm);
    const double dx = gx_->dx;
    for (int jf = 0; jf < n_; ++jf) {
      const double c = std::cos(gx_->k1[std::size_t(jf)] * dx);
      const double Sx = (2.0 - 2.0 * c) / dx;
      const double Mx = dx * (2.0 + c) / 3.0;
      const double diag_in = Sx * (2.0 * dz / 3.0) + Mx * (2.0 / dz);
      const double diag_top = Sx * (dz / 3.0) + Mx / dz;
      const double off = Sx * (dz / 6.0) - Mx / dz;
      off_[std::size_t(jf)] = off;
      double* cp = cp_.data() + std::size_t(jf) * std::size_t(m_);
      double* ip = inv_piv_.data() + std::size_t(jf) * std::size_t(m_);
      double piv = diag_in;
      ip[0] = 1.0 / piv;
      for (int l = 1; l < m_; ++l) {
        cp[l - 1] = off / piv;
        piv = (l == m_ - 1 ? diag_top : diag_in) - off * cp[l - 1];
        ip[l] = 1.0 / piv;
      }
    }
    row_.resize(std::size_t(n_));
    row2_.resize(std::size_t(n_));
    spec_.resize(nm);
  }

  void apply(std::span<const double> r, std::span<double> z) const {
    const auto n = std::size_t(n_), m = std::size_t(m_);
    for (std::size_t l = 0; l < m; ++l) {
      for (std::size_t j = 0; j < n; ++j) row_[j] = {r[l * n + j], 0.0};
      fft::forward(*gx_, row_.data(), row2_.data());
      for (std::size_t j = 0; j < n; ++j) spec_[j * m + l] = row2_[j];
    }
    for (std::size_t jf = 0; jf < n; ++jf) {
      cplx* f = spec_.data() + jf * m;
      const double* cp = cp_.data() + jf * m;
      const double* ip = inv_piv_.data() + jf * m;
      const double off = off_[jf];
      for (std::size_t l = 1; l < m; ++l) f[l] -= cp[l - 1] * f[l - 1];
      f[m - 1] *= ip[m - 1];
      for (std::size_t l = m - 1; l-- > 0;) f[l] = (f[l] - off * f[l + 1]) * ip[l];
    }
    for (std::size_t l = 0; l < m; ++l) {
      for (std::size_t j = 0; j < n; ++j) row_[j] = spec_[j * m + l];
      fft::inverse(*gx_, row_.data(), row2_.data());
      for (std::size_t j = 0; j < n; ++j) z[l * n + j] = row2_[j].real();
    }
  }

 private:
  GridPtr gx_;
  int n_, m_;
  std::vector<double> off_, cp_, inv_piv_;
  mutable std::vector<cplx> row_, row2_, spec_;
};

struct SolveOut {
  std::vector<double> u;
  int iters = 0;
  double residual_inf = 0.0;
};

SolveOut pcg(const PhaseOp& op, const FlatSolver& pre, std::span<const double> rhs,
             std::vector<double> u0, double tol, int max_iters) {
  const std::size_t N = rhs.size();
  SolveOut out;
  out.u = std::move(u0);
  out.u.resize(N, 0.0);

  const double norm_rhs = std::sqrt(kernels::dot(rhs, rhs));
  if (norm_rhs == 0.0) {
    std::fill(out.u.begin(), out.u.end(), 0.0);
    return out;
  }

  const kernels::Stencil9 st = op.stencil();
  const std::vector<double> zero_bottom(static_cast<std::size_t>(op.n), 0.0);
  std::vector<double> r(N), z(N), p(N), Ap(N);

  kernels::stencil9_apply(st, out.u, zero_bottom, r);
  for (std::size_t i = 0; i < N; ++i) r[i] = rhs[i] - r[i];
  double rn = std::sqrt(kernels::dot(r, r));

  if (rn > tol * norm_rhs) {
    pre.apply(r, z);
    p = z;
    double rz = kernels::dot(r, z);
    int it = 1;
    for (;; ++it) {
      kernels::stencil9_apply(st, p, zero_bottom, Ap);
      const double alpha = rz / kernels::dot(p, Ap);
      kernels::axpy(out.u, alpha, p);
      kernels::axpy(r, -alpha, Ap);
      rn = std::sqrt(kernels::dot(r, r));
      if (rn <= tol * norm_rhs) break;
      if (it == max_iters) {
        std::ostringstream os;
        os << "elliptic_solve: CG stalled after " << max_iters
           << " iterations at relative residual " << rn / norm_rhs;
        throw numerical_error(os.str());
      }
      pre.apply(r, z);
      const double rz_next = kernels::dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < N; ++i) p[i] = z[i] + beta * p[i];
    }
    out.iters = it;
  }
  out.residual_inf = kernels::max_abs(r);
  return out;
}

// Interface-row action of the phase operator on (data, level-1 solution):
// the variational flux through the interface, one weak value per node.
std::vector<double> interface_flux(const PhaseOp& op, std::span<const double> g,
                                   std::span<const double> u1) {
  const int n = op.n;
  std::vector<double> r(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const auto js = std::size_t(j);
    const auto jm = std::size_t((j + n - 1) % n), jp = std::size_t((j + 1) % n);
    r[js] = op.f0[js] * g[js] + op.fl[js] * g[jm] + op.fr[js] * g[jp] +
            op.u0[js] * u1[js] + op.ul[js] * u1[jm] + op.ur[js] * u1[jp];
  }
  return r;
}

}  // namespace

EllipticResult elliptic_solve(const SpectralField& h, const SpectralField& g,
                              const EllipticOptions& opts) {
  const TorusGrid& gr = h.grid();
  if (gr.dim != 1)
    throw config_error("elliptic_solve: the two-phase solve needs a one-dimensional interface");
  if (!gr.compatible(g.grid()))
    throw config_error("elliptic_solve: h and g live on different grids");
  if (!(opts.depth_factor >= 2.0)) {
    std::ostringstream os;
    os << "elliptic_solve: strip depth Z = " << opts.depth_factor
       << "*L is too shallow (factor >= 2 required)";
    throw config_error(os.str());
  }
  if (!(opts.tol > 0.0) || opts.max_iters < 1)
    throw config_error("elliptic_solve: tol must be positive and max_iters >= 1");
  const double lip = grad_sup(h);
  if (!(lip < 1.0)) {
    std::ostringstream os;
    os << "elliptic_solve: slope sup " << lip << " is outside the graph regime (< 1 required)";
    throw numerical_error(os.str());
  }

  const int n = gr.n;
  const int m = static_cast<int>(std::llround(opts.depth_factor * n));
  const double dx = gr.dx;
  const double Z = opts.depth_factor * gr.L;
  const double dz = Z / m;

  // slope of h at cell midpoints: derivative symbol with a half-cell shift
  std::vector<cplx> sc(h.coeffs().begin(), h.coeffs().end());
  for (std::size_t j = 0; j < sc.size(); ++j) {
    const double k = gr.k1[j];
    sc[j] *= cplx(0.0, k) * std::polar(1.0, k * dx / 2.0);
  }
  sc[std::size_t(n / 2)] = 0.0;
  const SpectralField mid_field = SpectralField::from_coeffs(h.grid_ptr(), std::move(sc));
  const auto mid = mid_field.values();

  TwoPhaseField field;
  field.grid = h.grid_ptr();
  field.levels = m;
  field.depth = Z;
  field.shear_plus.resize(std::size_t(n));
  field.shear_minus.resize(std::size_t(n));
  for (int j = 0; j < n; ++j) {
    field.shear_plus[std::size_t(j)] = -mid[std::size_t(j)];
    field.shear_minus[std::size_t(j)] = mid[std::size_t(j)];
  }

  const PhaseOp op_plus = build_phase(n, m, dx, dz, field.shear_plus);
  const PhaseOp op_minus = build_phase(n, m, dx, dz, field.shear_minus);
  const FlatSolver pre(h.grid_ptr(), m, dz);

  const auto gv = g.values();
  const std::size_t N = std::size_t(n) * std::size_t(m);
  auto make_rhs = [&](const PhaseOp& op) {
    std::vector<double> rhs(N, 0.0);
    for (int j = 0; j < n; ++j) {
      const auto js = std::size_t(j);
      const auto jm = std::size_t((j + n - 1) % n), jp = std::size_t((j + 1) % n);
      rhs[js] = -(op.dl[js] * gv[jm] + op.d0[js] * gv[js] + op.dr[js] * gv[jp]);
    }
    return rhs;
  };

  const bool warm = opts.warm_start != nullptr && opts.warm_start->grid != nullptr &&
                    opts.warm_start->grid->compatible(gr) && opts.warm_start->levels == m &&
                    opts.warm_start->depth == Z;
  auto warm_rows = [&](const std::vector<double>& f) {
    return warm ? std::vector<double>(f.begin() + n, f.end()) : std::vector<double>();
  };

  const SolveOut sol_plus = pcg(op_plus, pre, make_rhs(op_plus),
                                warm_rows(warm ? opts.warm_start->f_plus : field.f_plus),
                                opts.tol, opts.max_iters);
  const SolveOut sol_minus = pcg(op_minus, pre, make_rhs(op_minus),
                                 warm_rows(warm ? opts.warm_start->f_minus : field.f_minus),
                                 opts.tol, opts.max_iters);

  field.f_plus.reserve((std::size_t(m) + 1) * std::size_t(n));
  field.f_minus.reserve((std::size_t(m) + 1) * std::size_t(n));
  field.f_plus.assign(gv.begin(), gv.end());
  field.f_plus.insert(field.f_plus.end(), sol_plus.u.begin(), sol_plus.u.end());
  field.f_minus.assign(gv.begin(), gv.end());
  field.f_minus.insert(field.f_minus.end(), sol_minus.u.begin(), sol_minus.u.end());
  field.iters_plus = sol_plus.iters;
  field.iters_minus = sol_minus.iters;
  field.residual_inf = std::max(sol_plus.residual_inf, sol_minus.residual_inf);

  const std::vector<double> flux_plus =
      interface_flux(op_plus, gv, std::span<const double>(sol_plus.u).first(std::size_t(n)));
  const std::vector<double> flux_minus =
      interface_flux(op_minus, gv, std::span<const double>(sol_minus.u).first(std::size_t(n)));
  std::vector<double> flux(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < flux.size(); ++j) flux[j] = flux_plus[j] + flux_minus[j];

  const double D = kernels::dot(gv, flux);
  const double mean_flux = kernels::sum(flux);

  const SpectralField hx = derivative(h, 0);
  std::vector<double> metric(static_cast<std::size_t>(n));
  kernels::metric_1(metric, hx.values());
  std::vector<double> vv(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < vv.size(); ++j) vv[j] = flux[j] / (dx * metric[j]);

  return {std::move(field), SpectralField::from_values(h.grid_ptr(), std::move(vv)), D,
          mean_flux};
}

EllipticResult elliptic_velocity(const SpectralField& h, const EllipticOptions& opts) {
  return elliptic_solve(h, curvature(h), opts);
}

}  // namespace mslab
