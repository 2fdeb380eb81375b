#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "mslab/config.hpp"
#include "mslab/errors.hpp"
#include "mslab/functionals.hpp"
#include "mslab/linear_flow.hpp"
#include "mslab/norms.hpp"
#include "mslab/solver.hpp"
#include "mslab/spectral_field.hpp"

#include "test_util.hpp"

using namespace mslab;

namespace {

double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

double sup_diff(const SpectralField& a, const SpectralField& b) {
  const auto va = a.values();
  const auto vb = b.values();
  double m = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i)
    m = std::max(m, std::abs(va[i] - vb[i]));
  return m;
}

SpectralField single_mode(GridPtr g, int j, double amp) {
  std::vector<std::complex<double>> c(g->size(), 0.0);
  c[std::size_t(j)] = std::complex<double>(0.0, -0.5 * amp);
  c[std::size_t(g->n - j)] = std::complex<double>(0.0, 0.5 * amp);
  return SpectralField::from_coeffs(g, std::move(c));
}

InterfaceState advance(InterfaceState s, double dt, int steps,
                       const StepControls& ctl) {
  for (int i = 0; i < steps; ++i) {
    StepResult r = step_imex(s, dt, ctl);
    REQUIRE(r.rejections == 0);
    REQUIRE(r.dt_used == dt);
    s = std::move(r.state);
  }
  return s;
}

RunConfig base_config_1d() {
  RunConfig cfg;
  cfg.dim = 1;
  cfg.n = 128;
  cfg.L = 32.0;
  cfg.t_end = 2.0;
  cfg.dt_init = 1e-3;
  cfg.init_family = "gaussian";
  cfg.init_amplitude = 0.4;
  cfg.init_sigma = 2.0;
  cfg.snapshots = 4;
  return cfg;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag)
      : path(std::filesystem::temp_directory_path() /
             ("mslab_solver_" + tag + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("flat_dtn velocity of a small single mode is -2 a k^3 sin(kx)") {
  auto g = make_grid(1, 128, 2.0 * M_PI);
  const int j = 3;
  const double k = double(j);
  const double a = 1e-6;
  SpectralField h = single_mode(g, j, a);

  VelocityField vf = flat_dtn_velocity(h);
  CHECK(vf.source == VelocityScheme::flat_dtn);
  const auto v = vf.V.values();
  double worst = 0.0;
  for (int i = 0; i < g->n; ++i) {
    const double expect = -2.0 * a * k * k * k * std::sin(k * g->x(i));
    worst = std::max(worst, std::abs(v[std::size_t(i)] - expect));
  }
  CHECK(worst <= 1e-9 * 2.0 * a * k * k * k);  // cubic self-interaction floor

  SpectralField zero(g);
  CHECK(sup_norm(flat_dtn_velocity(zero).V) == 0.0);
}

TEST_CASE("one step at amplitude 1e-4 matches the exact linear evolution") {
  auto g = make_grid(1, 64, 2.0 * M_PI);
  SpectralField h0 = single_mode(g, 1, 1e-4);
  const double dt = 0.01;
  SpectralField ref = evolve_linear(h0, dt);

  for (VelocityScheme scheme :
       {VelocityScheme::flat_dtn, VelocityScheme::elliptic}) {
    StepControls ctl;
    ctl.scheme = scheme;
    StepResult r = step_imex(InterfaceState{h0, 0.0}, dt, ctl);
    CHECK(r.rejections == 0);
    CHECK(r.dt_used == dt);
    CHECK(r.state.t == dt);
    // the exact-symbol scheme leaves only the cubic remainder; the strip
    // solve adds its vertical discretization error on top
    const double tol = scheme == VelocityScheme::flat_dtn ? 1e-10 : 1e-8;
    CHECK(sup_diff(r.state.h, ref) <= tol);
  }
}

TEST_CASE("dt halving converges at second order") {
  auto g = make_grid(1, 128, 32.0);
  SpectralField h0 = test_util::gaussian_bump(g, 1.5, 0.5);
  StepControls ctl;
  const double dt = 0.02;

  InterfaceState s0{h0, 0.0};
  SpectralField c1 = advance(s0, dt, 1, ctl).h;
  SpectralField c2 = advance(s0, dt / 2, 2, ctl).h;
  SpectralField c4 = advance(s0, dt / 4, 4, ctl).h;

  const double e1 = sup_diff(c1, c2);
  const double e2 = sup_diff(c2, c4);
  REQUIRE(e1 > 1e-13);
  REQUIRE(e2 > 1e-14);
  const double order = std::log2(e1 / e2);
  CHECK(order >= 1.8);
}

TEST_CASE("entry diagnostics: elliptic ledger and pairing dissipation coincide") {
  auto g = make_grid(1, 64, 32.0);
  SpectralField h0 = test_util::gaussian_bump(g, 2.0, 0.4);

  StepControls ell;
  ell.scheme = VelocityScheme::elliptic;
  EllipticCache cache;
  StepResult re = step_imex(InterfaceState{h0, 0.0}, 1e-3, ell, &cache);
  CHECK(re.E0 == doctest::Approx(energy(h0)).epsilon(1e-14));
  REQUIRE(re.D0_ledger > 0.0);
  CHECK(rel_diff(re.D0_ledger, re.D0_consistent) <= 1e-12);

  StepControls flat;
  StepResult rf = step_imex(InterfaceState{h0, 0.0}, 1e-3, flat);
  REQUIRE(rf.D0_ledger > 0.0);
  REQUIRE(rf.D0_consistent > 0.0);
  // surrogate and pairing differ by at most the metric factors
  CHECK(rf.D0_consistent / rf.D0_ledger > 0.5);
  CHECK(rf.D0_consistent / rf.D0_ledger < 2.0);
  // warm-started elliptic and the surrogate see the same interface
  CHECK(rel_diff(re.E0, rf.E0) == 0.0);
}

TEST_CASE("stepping a zero field keeps it zero and grows dt at the cap") {
  auto g = make_grid(1, 64, 16.0);
  StepResult r = step_imex(InterfaceState{SpectralField(g), 0.0}, 0.1);
  CHECK(sup_norm(r.state.h) == 0.0);
  CHECK(r.E0 == 0.0);
  CHECK(r.D0_ledger == 0.0);
  CHECK(r.D0_consistent == 0.0);
  CHECK(r.dt_next == doctest::Approx(0.2));
}

TEST_CASE("step controls: dt validation and forced rejection paths") {
  auto g = make_grid(1, 64, 16.0);
  InterfaceState s{test_util::gaussian_bump(g, 2.0, 0.3), 0.0};

  CHECK_THROWS_AS(step_imex(s, 0.0), config_error);
  CHECK_THROWS_AS(step_imex(s, -1.0), config_error);

  StepControls underflow;
  underflow.dt_min = 1.0;  // any dt below one underflows immediately
  CHECK_THROWS_WITH_AS(step_imex(s, 0.5, underflow),
                       doctest::Contains("dt underflow"), numerical_error);

  StepControls spent;
  spent.energy_tol = -1.0;  // E' <= 0 is unsatisfiable, every stage rejects
  spent.max_rejects = 3;
  CHECK_THROWS_WITH_AS(step_imex(s, 0.1, spent), doctest::Contains("gave up"),
                       numerical_error);

  auto g2 = make_grid(2, 16, 16.0);
  StepControls ell;
  ell.scheme = VelocityScheme::elliptic;
  CHECK_THROWS_AS(step_imex(InterfaceState{SpectralField(g2), 0.0}, 0.1, ell),
                  config_error);

  CHECK(scheme_from_name("flat_dtn") == VelocityScheme::flat_dtn);
  CHECK(scheme_from_name("elliptic") == VelocityScheme::elliptic);
  CHECK_THROWS_AS(scheme_from_name("auto"), config_error);
}

TEST_CASE("initial data families") {
  RunConfig cfg = base_config_1d();

  SUBCASE("flat is zero") {
    cfg.init_family = "flat";
    CHECK(sup_norm(initial_data(cfg)) == 0.0);
  }
  SUBCASE("gaussian peaks at the center node with the given height") {
    SpectralField h = initial_data(cfg);
    CHECK(sup_norm(h) == doctest::Approx(0.4).epsilon(1e-12));
    const auto v = h.values();
    CHECK(v[std::size_t(cfg.n / 2)] == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("multibump is deterministic in the seed") {
    cfg.init_family = "multibump";
    cfg.init_bumps = 3;
    SpectralField a = initial_data(cfg);
    SpectralField b = initial_data(cfg);
    CHECK(sup_diff(a, b) == 0.0);
    cfg.seed = 99;
    SpectralField c = initial_data(cfg);
    CHECK(sup_diff(a, c) > 0.0);
  }
  SUBCASE("band_random hits its slope target") {
    cfg.init_family = "band_random";
    cfg.init_amplitude = 0.35;
    cfg.init_gamma = 2.0;
    cfg.init_jmax = 8;
    SpectralField h = initial_data(cfg);
    CHECK(grad_sup(h) == doctest::Approx(0.35).epsilon(1e-12));

    cfg.init_amplitude = 1.5;
    CHECK_THROWS_AS(initial_data(cfg), config_error);
  }
  SUBCASE("init_energy rescales the excess area exactly") {
    cfg.init_energy = 0.005;
    SpectralField h = initial_data(cfg);
    CHECK(energy(h) == doctest::Approx(0.005).epsilon(1e-10));

    cfg.init_family = "flat";
    CHECK_THROWS_AS(initial_data(cfg), config_error);
  }
  SUBCASE("two dimensions") {
    cfg.dim = 2;
    cfg.n = 32;
    cfg.L = 16.0;
    SpectralField h = initial_data(cfg);
    CHECK(sup_norm(h) == doctest::Approx(0.4).epsilon(1e-12));
  }
}

TEST_CASE("a localized 1-d run dissipates, conserves mass, and stays clean") {
  RunConfig cfg = base_config_1d();
  // wide box: the nonlocal velocity grows algebraic tails, so the outer
  // band must sit far from the bumps to stay under the contamination budget
  cfg.n = 256;
  cfg.L = 64.0;
  cfg.init_family = "multibump";
  cfg.init_bumps = 3;
  cfg.init_amplitude = 0.3;
  cfg.scheme = "flat_dtn";
  cfg.t_end = 2.0;

  RunOutput out = run_simulation(cfg);
  CHECK(out.abort_reason.empty());
  CHECK(out.scheme == "flat_dtn");
  CHECK(out.steps > 10);
  CHECK(out.first_breach_t == -1.0);

  REQUIRE(out.series.size() >= 8);
  REQUIRE(out.series.size() == out.flagged.size());
  CHECK(out.series.front().t == 0.0);
  CHECK(out.series.back().t == doctest::Approx(cfg.t_end).epsilon(1e-9));

  const FunctionalRecord& r0 = out.series.front();
  for (std::size_t i = 0; i < out.series.size(); ++i) {
    const FunctionalRecord& r = out.series[i];
    CHECK(out.flagged[i] == 0);
    CHECK(r.lip < 1.0);
    CHECK(r.D >= 0.0);
    CHECK(r.D_source == "surrogate");
    if (i > 0) {
      CHECK(out.series[i].t > out.series[i - 1].t);
      CHECK(out.series[i].E <= out.series[i - 1].E * (1.0 + 1e-8));
    }
    CHECK(std::abs(r.signed_mass - r0.signed_mass) <= 1e-8 * r0.Vmass);
    CHECK(r.dimless ==
          doctest::Approx(std::pow(r.E, 2.0) * r.D).epsilon(1e-12));
  }
  CHECK(out.series.back().E < 0.5 * r0.E);

  // step-entry nodes: strictly increasing times bracketing [0, t_end],
  // energies nonincreasing under the acceptance rule
  REQUIRE(out.node_t.size() == std::size_t(out.steps) + 1);
  REQUIRE(out.node_E.size() == out.node_t.size());
  REQUIRE(out.node_D_ledger.size() == out.node_t.size());
  REQUIRE(out.node_D_consistent.size() == out.node_t.size());
  CHECK(out.node_t.front() == 0.0);
  CHECK(out.node_t.back() == doctest::Approx(cfg.t_end).epsilon(1e-9));
  for (std::size_t i = 1; i < out.node_t.size(); ++i) {
    CHECK(out.node_t[i] > out.node_t[i - 1]);
    CHECK(out.node_E[i] <= out.node_E[i - 1] * (1.0 + 1e-8));
    CHECK(out.node_D_consistent[i] >= 0.0);
  }

  // snapshots: t = 0 first, t_end last, nondecreasing, bounded count
  REQUIRE(out.snapshots.size() >= 2);
  CHECK(out.snapshots.size() <= std::size_t(cfg.snapshots) + 2);
  CHECK(out.snapshots.front().t == 0.0);
  CHECK(out.snapshots.back().t == doctest::Approx(cfg.t_end).epsilon(1e-9));
  for (std::size_t i = 1; i < out.snapshots.size(); ++i)
    CHECK(out.snapshots[i].t >= out.snapshots[i - 1].t);
}

TEST_CASE("a flat run is identically zero") {
  RunConfig cfg = base_config_1d();
  cfg.init_family = "flat";
  cfg.t_end = 1.0;
  RunOutput out = run_simulation(cfg);
  CHECK(out.abort_reason.empty());
  CHECK(out.steps > 0);
  for (const FunctionalRecord& r : out.series) {
    CHECK(r.E == 0.0);
    CHECK(r.D == 0.0);
    CHECK(r.Vmass == 0.0);
    CHECK(r.h_inf == 0.0);
    CHECK(r.lip == 0.0);
  }
  CHECK(sup_norm(out.final_state.h) == 0.0);
}

TEST_CASE("boundary contamination is flagged and the run continues") {
  RunConfig cfg = base_config_1d();
  cfg.init_sigma = 8.0;  // tails reach the seam at ~exp(-1.6) of the peak
  cfg.t_end = 0.5;
  RunOutput out = run_simulation(cfg);
  CHECK(out.abort_reason.empty());
  CHECK(out.first_breach_t == 0.0);
  for (std::size_t i = 0; i < out.flagged.size(); ++i)
    CHECK(out.flagged[i] == 1);
  CHECK(out.series.back().t == doctest::Approx(cfg.t_end).epsilon(1e-9));
}

TEST_CASE("lip_bound gates the initial data") {
  RunConfig cfg = base_config_1d();
  cfg.init_amplitude = 1.2;
  cfg.init_sigma = 1.0;  // slope sup ~ 0.73
  cfg.lip_bound = 0.5;
  CHECK_THROWS_WITH_AS(run_simulation(cfg), doctest::Contains("lip_bound"),
                       config_error);
  cfg.lip_bound = 0.9;
  CHECK_NOTHROW(run_simulation(cfg));
}

TEST_CASE("persistence round trip and manifest re-run identity") {
  TempDir dir("persist");
  RunConfig cfg = base_config_1d();
  cfg.n = 64;
  cfg.scheme = "auto";  // resolves to elliptic at this size
  cfg.t_end = 1.0;
  cfg.snapshots = 3;
  cfg.out = dir.str();

  RunOutput out = run_simulation(cfg);
  CHECK(out.scheme == "elliptic");
  CHECK(out.abort_reason.empty());
  for (const FunctionalRecord& r : out.series) CHECK(r.D_source == "elliptic");

  namespace fs = std::filesystem;
  REQUIRE(fs::exists(dir.path / "series.csv"));
  REQUIRE(fs::exists(dir.path / "flags.csv"));
  REQUIRE(fs::exists(dir.path / "nodes.csv"));
  REQUIRE(fs::exists(dir.path / "manifest.txt"));
  REQUIRE(fs::exists(dir.path / "snapshots" / "snap_000.csv"));
  CHECK(std::size_t(std::distance(
            fs::directory_iterator(dir.path / "snapshots"),
            fs::directory_iterator{})) == out.snapshots.size());

  // the written ledger reparses to the in-memory rows
  std::vector<FunctionalRecord> disk =
      read_ledger_csv((dir.path / "series.csv").string());
  REQUIRE(disk.size() == out.series.size());
  for (std::size_t i = 0; i < disk.size(); ++i) {
    CHECK(disk[i].t == out.series[i].t);
    CHECK(disk[i].E == out.series[i].E);
    CHECK(disk[i].D == out.series[i].D);
    CHECK(disk[i].Vmass == out.series[i].Vmass);
  }

  // the manifest is a loadable config that reproduces the run exactly
  RunConfig again = load_config((dir.path / "manifest.txt").string());
  again.out.clear();
  RunOutput rerun = run_simulation(again);
  REQUIRE(rerun.series.size() == out.series.size());
  for (std::size_t i = 0; i < rerun.series.size(); ++i) {
    CHECK(rel_diff(rerun.series[i].E, out.series[i].E) <= 1e-12);
    CHECK(rel_diff(rerun.series[i].D, out.series[i].D) <= 1e-12);
    CHECK(rerun.series[i].t == out.series[i].t);
  }
  REQUIRE(rerun.node_t.size() == out.node_t.size());
  CHECK(rel_diff(rerun.node_D_consistent.back(),
                 out.node_D_consistent.back()) <= 1e-12);
}

TEST_CASE("a small 2-d run dissipates and persists nothing without out") {
  RunConfig cfg;
  cfg.dim = 2;
  cfg.n = 32;
  cfg.L = 16.0;
  cfg.t_end = 0.2;
  cfg.dt_init = 1e-3;
  cfg.init_family = "gaussian";
  cfg.init_amplitude = 0.3;
  cfg.init_sigma = 1.5;
  cfg.snapshots = 2;

  RunOutput out = run_simulation(cfg);
  CHECK(out.scheme == "flat_dtn");
  CHECK(out.abort_reason.empty());
  REQUIRE(out.series.size() >= 3);
  const double E0 = out.series.front().E;
  CHECK(out.series.back().E < E0);
  for (std::size_t i = 1; i < out.series.size(); ++i)
    CHECK(out.series[i].E <= out.series[i - 1].E * (1.0 + 1e-8));
  for (const FunctionalRecord& r : out.series)
    CHECK(r.dimless == doctest::Approx(r.E * r.D * r.D).epsilon(1e-12));
}
