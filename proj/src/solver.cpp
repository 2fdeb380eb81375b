#include "mslab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mslab/errors.hpp"
#include "mslab/ineq.hpp"
#include "mslab/kernels.hpp"
#include "mslab/norms.hpp"
#include "mslab/operators.hpp"
#include "mslab/rng.hpp"

#ifndef MSLAB_GIT_DESCRIBE
#define MSLAB_GIT_DESCRIBE "unknown"
#endif

namespace mslab {

namespace {

using cplx = std::complex<double>;

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// sqrt(1 + |grad h|^2) at the nodes.
std::vector<double> metric_values(const SpectralField& h) {
  const TorusGrid& g = h.grid();
  std::vector<double> out(g.size());
  if (g.dim == 1) {
    SpectralField hx = derivative(h, 0);
    kernels::metric_1(out, hx.values());
  } else {
    SpectralField hx = derivative(h, 0);
    SpectralField hy = derivative(h, 1);
    kernels::metric_2(out, hx.values(), hy.values());
  }
  return out;
}

/// One velocity evaluation at a fixed graph: the explicit remainder
/// N(h) = sqrt(1+|grad h|^2) V(h) + 2 |grad|^3 h in spectral form (dealiased,
/// mean projected out), plus--on request--the entry diagnostics.
struct StageEval {
  SpectralField N;
  double E = 0.0;
  double D_led = 0.0;
  double D_cons = 0.0;
};

StageEval eval_stage(const SpectralField& h, const StepControls& ctl,
                     EllipticCache* cache, bool diag) {
  const TorusGrid& g = h.grid();
  SpectralField H = curvature(h);  // slope gate lives here

  SpectralField V(h.grid_ptr());
  double d_led = 0.0;
  if (ctl.scheme == VelocityScheme::flat_dtn) {
    V = apply_multiplier(H, 1.0);
    for (auto& c : V.mutable_coeffs()) c *= 2.0;
    if (diag) d_led = dissipation_surrogate_curvature(H);
  } else {
    EllipticOptions opts;
    opts.depth_factor = ctl.depth_factor;
    if (cache && cache->field) opts.warm_start = &*cache->field;
    EllipticResult res = elliptic_solve(h, H, opts);
    V = std::move(res.V);
    d_led = res.D;
    if (cache) cache->field = std::move(res.field);
  }

  std::vector<double> mv = metric_values(h);
  {
    const auto vv = V.values();
    for (std::size_t i = 0; i < mv.size(); ++i) mv[i] *= vv[i];
  }

  double E = 0.0;
  double d_cons = 0.0;
  if (diag) {
    E = energy(h);
    d_cons = kernels::dot(H.values(), mv) * g.cell();
  }

  SpectralField rhs = SpectralField::from_values(h.grid_ptr(), std::move(mv));
  const auto rc = rhs.coeffs();
  const auto hc = h.coeffs();
  std::vector<cplx> nc(g.size());
  for (std::size_t i = 0; i < nc.size(); ++i) {
    if (!g.keep23[i]) continue;
    const double k3 = g.kmag[i] * g.kmag[i] * g.kmag[i];
    nc[i] = rc[i] + 2.0 * k3 * hc[i];
  }
  nc[0] = 0.0;

  return StageEval{SpectralField::from_coeffs(h.grid_ptr(), std::move(nc)), E,
                   d_led, d_cons};
}

void add_bump(std::vector<double>& v, const TorusGrid& g, double cx, double cy,
              double sigma, double amp) {
  const double inv = 0.5 / (sigma * sigma);
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i) {
      const double dxc = g.x(i) - cx;
      v[std::size_t(i)] += amp * std::exp(-dxc * dxc * inv);
    }
  } else {
    for (int ix = 0; ix < g.n; ++ix) {
      const double dxc = g.x(ix) - cx;
      const double ex = std::exp(-dxc * dxc * inv);
      for (int iy = 0; iy < g.n; ++iy) {
        const double dyc = g.x(iy) - cy;
        v[std::size_t(ix) * std::size_t(g.n) + std::size_t(iy)] +=
            amp * ex * std::exp(-dyc * dyc * inv);
      }
    }
  }
}

/// Amplitude scaling s*h with E(s*h) = target, found by bisection on the
/// monotone map s -> excess area.  Pure arithmetic per trial: the squared
/// slopes are computed once.
SpectralField rescale_to_energy(const SpectralField& h, double target) {
  const TorusGrid& g = h.grid();
  if (!(sup_norm(h) > 0.0))
    throw config_error(
        "initial_data: init_energy > 0 needs a nonzero field "
        "(init_family = flat cannot be rescaled)");

  std::vector<double> w(g.size(), 0.0);
  for (int ax = 0; ax < g.dim; ++ax) {
    SpectralField d = derivative(h, ax);
    const auto dv = d.values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += dv[i] * dv[i];
  }
  const double cell = g.cell();
  auto excess_of = [&](double s) {
    double acc = 0.0;
    for (double wi : w) {
      const double q = s * s * wi;
      acc += q / (std::sqrt(1.0 + q) + 1.0);
    }
    return acc * cell;
  };

  double lo = 0.0;
  double hi = 1.0;
  int guard = 0;
  while (excess_of(hi) < target) {
    hi *= 2.0;
    if (++guard > 200)
      throw numerical_error("initial_data: energy rescale bracket overflow");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess_of(mid) < target ? lo : hi) = mid;
  }
  const double s = 0.5 * (lo + hi);

  std::vector<cplx> c(h.coeffs().begin(), h.coeffs().end());
  for (auto& z : c) z *= s;
  return SpectralField::from_coeffs(h.grid_ptr(), std::move(c));
}

}  // namespace

bool boundary_contaminated(const SpectralField& h, double tol) {
  const TorusGrid& g = h.grid();
  const double h_sup = sup_norm(h);
  if (!(h_sup > 0.0)) return false;
  const double half = 0.5 * g.L;
  const double band = 0.45 * g.L;
  const auto v = h.values();
  double outer = 0.0;
  if (g.dim == 1) {
    for (int i = 0; i < g.n; ++i) {
      if (std::abs(g.x(i) - half) >= band)
        outer = std::max(outer, std::abs(v[std::size_t(i)]));
    }
  } else {
    for (int ix = 0; ix < g.n; ++ix) {
      const double dxc = std::abs(g.x(ix) - half);
      for (int iy = 0; iy < g.n; ++iy) {
        if (std::max(dxc, std::abs(g.x(iy) - half)) >= band)
          outer = std::max(
              outer,
              std::abs(v[std::size_t(ix) * std::size_t(g.n) + std::size_t(iy)]));
      }
    }
  }
  return outer > tol * h_sup;
}

namespace {

void require_stream(const std::ofstream& os, const std::string& path) {
  if (!os) throw config_error("cannot write '" + path + "'");
}

void write_flags_csv(const std::string& path,
                     const std::vector<FunctionalRecord>& rows,
                     const std::vector<std::uint8_t>& flagged) {
  std::ofstream os(path);
  require_stream(os, path);
  os << "t,flagged\n" << std::setprecision(17);
  for (std::size_t i = 0; i < rows.size(); ++i)
    os << rows[i].t << ',' << int(flagged[i]) << '\n';
  os.flush();
  require_stream(os, path);
}

void write_nodes_csv(const std::string& path, const std::vector<double>& t,
                     const std::vector<double>& E, const std::vector<double>& dl,
                     const std::vector<double>& dc) {
  std::ofstream os(path);
  require_stream(os, path);
  os << "t,E,D_ledger,D_consistent\n" << std::setprecision(17);
  for (std::size_t i = 0; i < t.size(); ++i)
    os << t[i] << ',' << E[i] << ',' << dl[i] << ',' << dc[i] << '\n';
  os.flush();
  require_stream(os, path);
}

void write_snapshot_csv(const std::string& path, const InterfaceState& st,
                        const std::string& scheme) {
  const TorusGrid& g = st.h.grid();
  std::ofstream os(path);
  require_stream(os, path);
  os << std::setprecision(17);
  os << "# t = " << st.t << '\n';
  os << "# dim = " << g.dim << '\n';
  os << "# n = " << g.n << '\n';
  os << "# L = " << g.L << '\n';
  os << "# scheme = " << scheme << '\n';
  const auto v = st.h.values();
  if (g.dim == 1) {
    os << "x,h\n";
    for (int i = 0; i < g.n; ++i)
      os << g.x(i) << ',' << v[std::size_t(i)] << '\n';
  } else {
    os << "x,y,h\n";
    for (int ix = 0; ix < g.n; ++ix)
      for (int iy = 0; iy < g.n; ++iy)
        os << g.x(ix) << ',' << g.x(iy) << ','
           << v[std::size_t(ix) * std::size_t(g.n) + std::size_t(iy)] << '\n';
  }
  os.flush();
  require_stream(os, path);
}

std::string snapshot_name(std::size_t index) {
  std::ostringstream os;
  os << "snap_" << std::setw(3) << std::setfill('0') << index << ".csv";
  return os.str();
}

}  // namespace

VelocityScheme scheme_from_name(const std::string& name) {
  if (name == "flat_dtn") return VelocityScheme::flat_dtn;
  if (name == "elliptic") return VelocityScheme::elliptic;
  throw config_error("unknown velocity scheme '" + name +
                     "' (expected flat_dtn or elliptic)");
}

VelocityField flat_dtn_velocity(const SpectralField& h) {
  SpectralField V = apply_multiplier(curvature(h), 1.0);
  for (auto& c : V.mutable_coeffs()) c *= 2.0;
  return VelocityField{std::move(V), VelocityScheme::flat_dtn};
}

StepResult step_imex(const InterfaceState& s, double dt,
                     const StepControls& ctl, EllipticCache* cache) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw config_error("step_imex: dt must be positive and finite");
  if (ctl.scheme == VelocityScheme::elliptic && s.h.grid().dim != 1)
    throw config_error(
        "step_imex: the elliptic scheme needs a one-dimensional interface");

  const TorusGrid& g = s.h.grid();
  const GridPtr gp = s.h.grid_ptr();
  const std::size_t m = g.size();

  const StageEval e1 = eval_stage(s.h, ctl, cache, true);
  const double h_sup = sup_norm(s.h);
  const auto hc = s.h.coeffs();
  const auto n1 = e1.N.coeffs();

  double dt_try = dt;
  int rejections = 0;
  std::string why = "none";
  for (;;) {
    if (rejections > ctl.max_rejects)
      throw numerical_error("step_imex: gave up after " +
                            std::to_string(rejections) + " rejections at t = " +
                            fmt(s.t) + " (last: " + why + ")");
    if (dt_try < ctl.dt_min)
      throw numerical_error("step_imex: dt underflow at t = " + fmt(s.t) +
                            ", dt = " + fmt(dt_try) + " (last rejection: " +
                            why + ")");

    // exact symbol of -2 |grad|^3 and its two phi weights, Taylor-switched
    // near z = 0
    std::vector<double> Ek(m), f1(m), f2(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double k3 = g.kmag[i] * g.kmag[i] * g.kmag[i];
      const double z = -2.0 * k3 * dt_try;
      Ek[i] = std::exp(z);
      if (std::abs(z) < 1e-4) {
        f1[i] = 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
        f2[i] = 0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0));
      } else {
        const double em = std::expm1(z);
        f1[i] = em / z;
        f2[i] = (em - z) / (z * z);
      }
    }

    std::vector<cplx> ac(m);
    for (std::size_t i = 0; i < m; ++i)
      ac[i] = Ek[i] * hc[i] + dt_try * f1[i] * n1[i];
    SpectralField a = SpectralField::from_coeffs(gp, std::move(ac));

    std::optional<StageEval> e2;
    try {
      e2.emplace(eval_stage(a, ctl, cache, false));
    } catch (const numerical_error& err) {
      why = err.what();
      ++rejections;
      dt_try *= 0.5;
      continue;
    }

    const auto n2 = e2->N.coeffs();
    const auto av = a.coeffs();
    std::vector<cplx> hn(m), corr(m);
    for (std::size_t i = 0; i < m; ++i) {
      corr[i] = dt_try * f2[i] * (n2[i] - n1[i]);
      hn[i] = av[i] + corr[i];
    }
    SpectralField hnew = SpectralField::from_coeffs(gp, std::move(hn));

    const double lip = grad_sup(hnew);
    if (!(lip < 1.0)) {
      why = "slope sup " + fmt(lip) + " >= 1";
      ++rejections;
      dt_try *= 0.5;
      continue;
    }
    const double e_new = energy(hnew);
    if (e_new > e1.E * (1.0 + ctl.energy_tol)) {
      why = "excess area rose from " + fmt(e1.E) + " to " + fmt(e_new);
      ++rejections;
      dt_try *= 0.5;
      continue;
    }

    SpectralField cf = SpectralField::from_coeffs(gp, std::move(corr));
    const double est = sup_norm(cf) / std::max(h_sup, 1e-300);
    double factor = est > 0.0 ? 0.8 * std::sqrt(ctl.change_target / est) : 2.0;
    factor = std::clamp(factor, 0.3, 2.0);

    return StepResult{InterfaceState{std::move(hnew), s.t + dt_try},
                      dt_try,
                      dt_try * factor,
                      rejections,
                      e1.E,
                      e1.D_led,
                      e1.D_cons};
  }
}

SpectralField initial_data(const RunConfig& cfg) {
  GridPtr gp = make_grid(cfg.dim, cfg.n, cfg.L);
  const TorusGrid& g = *gp;
  SpectralField h(gp);

  if (cfg.init_family == "flat") {
    // zero field
  } else if (cfg.init_family == "gaussian") {
    std::vector<double> v(g.size(), 0.0);
    add_bump(v, g, 0.5 * g.L, 0.5 * g.L, cfg.init_sigma, cfg.init_amplitude);
    h = SpectralField::from_values(gp, std::move(v));
  } else if (cfg.init_family == "multibump") {
    std::vector<double> v(g.size(), 0.0);
    for (int b = 0; b < cfg.init_bumps; ++b) {
      Rng rng(derive_seed(cfg.seed, 0xB000u + std::uint64_t(b)));
      const double cx = g.L * (0.35 + 0.3 * rng.uniform());
      const double cy =
          g.dim == 2 ? g.L * (0.35 + 0.3 * rng.uniform()) : 0.5 * g.L;
      const double sigma = cfg.init_sigma * (0.6 + 0.8 * rng.uniform());
      const double amp = cfg.init_amplitude * (0.5 + 0.5 * rng.uniform()) *
                         (b % 2 == 0 ? 1.0 : -1.0);
      add_bump(v, g, cx, cy, sigma, amp);
    }
    h = SpectralField::from_values(gp, std::move(v));
  } else if (cfg.init_family == "band_random") {
    if (!(cfg.init_amplitude > 0.0 && cfg.init_amplitude <= 1.0))
      throw config_error("init_amplitude = " + fmt(cfg.init_amplitude) +
                         ": band_random uses it as the slope sup target, "
                         "which must lie in (0, 1]");
    SampleSpec spec;
    spec.grid = gp;
    spec.gamma = cfg.init_gamma;
    spec.seed = cfg.seed;
    spec.lip_target = cfg.init_amplitude;
    spec.jmax = cfg.init_jmax;
    h = sample_field(spec);
  } else {
    throw config_error("unknown init_family '" + cfg.init_family + "'");
  }

  if (cfg.init_energy > 0.0) h = rescale_to_energy(h, cfg.init_energy);
  return h;
}

RunOutput run_simulation(const RunConfig& cfg_in) {
  // round-trip through the manifest text: validates every field and proves
  // the echo is faithful
  const RunConfig cfg = parse_config(manifest_text(cfg_in));
  set_num_threads(cfg.threads);

  const std::string scheme_name = cfg.resolved_scheme();
  const VelocityScheme scheme = scheme_from_name(scheme_name);
  const DSource src = scheme == VelocityScheme::elliptic ? DSource::elliptic
                                                         : DSource::surrogate;

  SpectralField h0 = initial_data(cfg);
  const double lip0 = grad_sup(h0);
  if (!(lip0 <= cfg.lip_bound))
    throw config_error("initial data slope sup " + fmt(lip0) +
                       " exceeds lip_bound = " + fmt(cfg.lip_bound));

  StepControls ctl;
  ctl.scheme = scheme;
  ctl.depth_factor = cfg.depth_factor;
  ctl.energy_tol = cfg.energy_tol;
  ctl.change_target = cfg.change_target;
  EllipticCache cache;

  InterfaceState state{std::move(h0), 0.0};

  // log-spaced ledger cadence and snapshot targets
  const double row_ratio = std::pow(10.0, 1.0 / cfg.rows_per_decade);
  double next_row = cfg.dt_init;
  std::vector<double> snap_targets;
  if (cfg.snapshots > 0) {
    const double hi = cfg.t_end;
    double lo = std::max(10.0 * cfg.dt_init, 1e-3 * hi);
    if (lo > hi) lo = hi;
    if (cfg.snapshots == 1) {
      snap_targets.push_back(hi);
    } else {
      for (int j = 0; j < cfg.snapshots; ++j)
        snap_targets.push_back(
            lo * std::pow(hi / lo, double(j) / (cfg.snapshots - 1)));
      snap_targets.back() = hi;
    }
  }
  std::size_t snap_idx = 0;

  std::vector<FunctionalRecord> rows;
  std::vector<std::uint8_t> flagged;
  std::vector<InterfaceState> snaps;
  std::vector<double> node_t, node_E, node_dl, node_dc;
  std::string abort_reason;
  double first_breach = -1.0;
  long steps = 0;
  long rejections = 0;

  auto emit_row = [&](double t, const SpectralField& h, double d_led) {
    rows.push_back(make_record(t, h, src, d_led));
    if (first_breach < 0.0 && boundary_contaminated(h, cfg.contamination_tol))
      first_breach = t;
    flagged.push_back(first_breach >= 0.0 ? 1 : 0);
  };

  snaps.push_back(state);  // t = 0 snapshot, always
  bool entry_row_pending = true;
  double dt = cfg.dt_init;
  try {
    while (cfg.t_end - state.t > 1e-12 * cfg.t_end) {
      const double dt_cap = std::min(dt, cfg.t_end - state.t);
      StepResult res = step_imex(state, dt_cap, ctl, &cache);

      node_t.push_back(state.t);
      node_E.push_back(res.E0);
      node_dl.push_back(res.D0_ledger);
      node_dc.push_back(res.D0_consistent);

      if (entry_row_pending) {
        emit_row(state.t, state.h, res.D0_ledger);
        entry_row_pending = false;
      } else if (state.t >= next_row) {
        emit_row(state.t, state.h, res.D0_ledger);
        while (next_row <= state.t) next_row *= row_ratio;
      }
      if (snap_idx < snap_targets.size() && state.t >= snap_targets[snap_idx] &&
          state.t > 0.0) {
        snaps.push_back(state);
        while (snap_idx < snap_targets.size() &&
               state.t >= snap_targets[snap_idx])
          ++snap_idx;
      }

      ++steps;
      rejections += res.rejections;
      state = std::move(res.state);
      // the controller alone doubles dt freely once the motion is slow;
      // capping at t/8 keeps ~20 step entries per decade for the ledger
      dt = std::min(res.dt_next, std::max(cfg.dt_init, state.t / 8.0));
    }

    const StageEval fin = eval_stage(state.h, ctl, &cache, true);
    node_t.push_back(state.t);
    node_E.push_back(fin.E);
    node_dl.push_back(fin.D_led);
    node_dc.push_back(fin.D_cons);
    emit_row(state.t, state.h, fin.D_led);
    snaps.push_back(state);
  } catch (const numerical_error& err) {
    abort_reason = err.what();
    try {
      const StageEval fin = eval_stage(state.h, ctl, &cache, true);
      node_t.push_back(state.t);
      node_E.push_back(fin.E);
      node_dl.push_back(fin.D_led);
      node_dc.push_back(fin.D_cons);
      emit_row(state.t, state.h, fin.D_led);
    } catch (const numerical_error&) {
      // leave the partial record as is
    }
    snaps.push_back(state);
  }

  if (!cfg.out.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(cfg.out) / "snapshots", ec);
    if (ec)
      throw config_error("cannot create output directory '" + cfg.out +
                         "': " + ec.message());
    const std::string base = cfg.out + "/";
    write_ledger_csv(base + "series.csv", rows);
    write_flags_csv(base + "flags.csv", rows, flagged);
    write_nodes_csv(base + "nodes.csv", node_t, node_E, node_dl, node_dc);
    for (std::size_t i = 0; i < snaps.size(); ++i)
      write_snapshot_csv(base + "snapshots/" + snapshot_name(i), snaps[i],
                         scheme_name);

    std::vector<std::pair<std::string, std::string>> notes;
    notes.emplace_back("git_describe", MSLAB_GIT_DESCRIBE);
    notes.emplace_back("scheme_resolved", scheme_name);
    notes.emplace_back("steps", std::to_string(steps));
    notes.emplace_back("rejections", std::to_string(rejections));
    notes.emplace_back("t_final", fmt(state.t));
    if (first_breach >= 0.0)
      notes.emplace_back("contamination_first_t", fmt(first_breach));
    if (!abort_reason.empty()) notes.emplace_back("abort", abort_reason);
    const std::string mpath = base + "manifest.txt";
    std::ofstream os(mpath);
    require_stream(os, mpath);
    os << manifest_text(cfg, notes);
    os.flush();
    require_stream(os, mpath);
  }

  return RunOutput{std::move(rows),
                   std::move(flagged),
                   std::move(snaps),
                   std::move(node_t),
                   std::move(node_E),
                   std::move(node_dl),
                   std::move(node_dc),
                   std::move(state),
                   std::move(abort_reason),
                   first_breach,
                   steps,
                   rejections,
                   scheme_name};
}

}  // namespace mslab
