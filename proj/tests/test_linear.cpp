#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "mslab/errors.hpp"
#include "mslab/fit.hpp"
#include "mslab/kernels.hpp"
#include "mslab/linear_flow.hpp"
#include "mslab/norms.hpp"
#include "mslab/operators.hpp"
#include "mslab/rng.hpp"

using namespace mslab;

namespace {

constexpr double kPi = std::numbers::pi;

SpectralField random_field(GridPtr g, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(g->size());
  for (auto& x : v) x = rng.normal();
  return SpectralField::from_values(std::move(g), std::move(v));
}

SpectralField gaussian_bump(GridPtr g, double sigma) {
  const double c = g->L / 2.0;
  std::vector<double> v(g->size());
  if (g->dim == 1) {
    for (int i = 0; i < g->n; ++i) {
      const double x = g->x(i) - c;
      v[std::size_t(i)] = std::exp(-x * x / (2.0 * sigma * sigma));
    }
  } else {
    for (int iy = 0; iy < g->n; ++iy)
      for (int ix = 0; ix < g->n; ++ix) {
        const double x = g->x(ix) - c, y = g->x(iy) - c;
        v[std::size_t(iy) * std::size_t(g->n) + std::size_t(ix)] =
            std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
      }
  }
  return SpectralField::from_values(std::move(g), std::move(v));
}

double inner(const SpectralField& a, const SpectralField& b) {
  return kernels::dot(a.values(), b.values()) * a.grid().cell();
}

// Adaptive Simpson on [a,b] (recursive bisection, absolute tolerance).
double adaptive_simpson(double (*f)(double), double a, double b, double fa,
                        double fm, double fb, double whole, double tol,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(double (*f)(double), double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

double radial_symbol_1d(double k) { return std::exp(-2.0 * k * k * k); }
double radial_symbol_2d(double k) { return k * std::exp(-2.0 * k * k * k); }

}  // namespace

TEST_CASE("propagator symbol table invariants") {
  auto g = make_grid(1, 64, 2.0 * kPi);
  const auto p = make_propagator(g, 0.7);
  CHECK(p.symbol[0] == 1.0);
  for (std::size_t i = 0; i < p.symbol.size(); ++i) {
    const double s = p.symbol[i];
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    // entries only vanish by underflow of the true positive value
    const double expo = 2.0 * std::pow(g->kmag[i], 3) * p.t;
    if (expo < 700.0) CHECK(s > 0.0);
  }

  const auto p0 = make_propagator(g, 0.0);
  for (double s : p0.symbol) CHECK(s == 1.0);

  const auto p1 = make_propagator(g, 0.3);
  const auto p2 = make_propagator(g, 1.1);
  const auto p12 = make_propagator(g, 1.4);
  for (std::size_t i = 0; i < p1.symbol.size(); ++i)
    CHECK(std::abs(p1.symbol[i] * p2.symbol[i] - p12.symbol[i]) <= 1e-14);

  CHECK_THROWS_AS(make_propagator(g, -0.1), config_error);
}

TEST_CASE("single mode evolves by the exact factor") {
  auto g = make_grid(1, 64, 2.0 * kPi);
  std::vector<double> v(std::size_t(g->n));
  for (int i = 0; i < g->n; ++i) v[std::size_t(i)] = std::cos(g->x(i));
  const auto h0 = SpectralField::from_values(g, std::move(v));
  const auto h1 = evolve_linear(h0, 1.0);

  const double f = std::exp(-2.0);
  double worst = 0.0;
  for (int i = 0; i < g->n; ++i)
    worst = std::max(worst,
                     std::abs(h1.values()[std::size_t(i)] -
                              f * std::cos(g->x(i))));
  CHECK(worst / f <= 1e-12);
}

TEST_CASE("mean conservation and semigroup property") {
  auto g = make_grid(1, 128, 10.0);
  const auto h0 = random_field(g, 11);

  const auto ht = evolve_linear(h0, 0.37);
  CHECK(std::abs(mean(ht) - mean(h0)) <= 1e-13 * std::max(1.0, std::abs(mean(h0))));

  const auto a = evolve_linear(evolve_linear(h0, 0.3), 0.7);
  const auto b = evolve_linear(h0, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i)
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  CHECK(worst <= 1e-12 * sup_norm(h0));

  double prev = l2_norm(h0);
  for (double t : {0.01, 0.1, 0.5, 2.0, 10.0}) {
    const double cur = l2_norm(evolve_linear(h0, t));
    CHECK(cur <= prev * (1.0 + 1e-14));
    prev = cur;
  }
}

TEST_CASE("bump decay exponents in d=1") {
  auto g = make_grid(1, 2048, 128.0);
  const auto h0 = gaussian_bump(g, 0.5);

  // window [1, 100] sits inside the gap guard: 2 kmin^3 * 100 = 0.024
  CHECK(2.0 * std::pow(g->kmin(), 3) * 100.0 <= 0.04);

  std::vector<double> t, sup, gsup;
  for (int i = 0; i < 16; ++i) {
    t.push_back(std::pow(10.0, 2.0 * double(i) / 15.0));
    const auto h = evolve_linear(h0, t.back());
    sup.push_back(sup_norm(h));
    gsup.push_back(grad_sup(h));
  }

  const auto fs = fit_decay(t, sup, "sup", 1.0, 100.0);
  CHECK(fs.n_points >= 8);
  CHECK(fs.slope == doctest::Approx(-1.0 / 3.0).epsilon(0.15));
  CHECK(std::abs(fs.slope + 1.0 / 3.0) <= 0.05);

  const auto fg = fit_decay(t, gsup, "grad_sup", 1.0, 100.0);
  CHECK(std::abs(fg.slope + 2.0 / 3.0) <= 0.05);
}

TEST_CASE("adjoint evolution: terminal identity, duality, rejections") {
  auto g = make_grid(1, 128, 10.0);
  const auto psi = random_field(g, 21);
  const auto h0 = random_field(g, 22);

  const auto uT = adjoint_evolve(psi, 2.0, 2.0);
  for (std::size_t i = 0; i < g->size(); ++i)
    CHECK(uT.values()[i] == doctest::Approx(psi.values()[i]).epsilon(1e-15));

  const double T = 0.7;
  const double lhs = inner(evolve_linear(h0, T), psi);
  const double rhs = inner(h0, adjoint_evolve(psi, T, 0.0));
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), 1.0));

  CHECK_THROWS_AS(adjoint_evolve(psi, 1.0, 1.5), config_error);
  CHECK_THROWS_AS(adjoint_evolve(psi, 1.0, -0.5), config_error);
}

TEST_CASE("kernel profile d=1: oracle value, normalization, honest tail") {
  const auto p = kernel_profile(1, 40.0, 161);

  // r = 0 value against adaptive quadrature of the radial integral and
  // against the closed form Gamma(1/3) / (3 * 2^(1/3) * pi)
  const double oracle =
      integrate(radial_symbol_1d, 0.0, 5.0, 1e-13) / kPi;
  CHECK(std::abs(p.value[0] - oracle) <= 1e-8);
  const double closed = std::tgamma(1.0 / 3.0) / (3.0 * std::cbrt(2.0) * kPi);
  CHECK(std::abs(p.value[0] - closed) <= 1e-10);

  CHECK(std::abs(p.normalization - 1.0) <= 1e-14);
  CHECK(p.tail_converged);
  CHECK(p.tail_drift <= 1e-4);
  CHECK(p.max_second_diff < 0.5);

  // spot values frozen from an independent quadrature of the profile
  auto at = [&](double r) {
    const double dr = p.r[1] - p.r[0];
    return p.value[std::size_t(std::lround(r / dr))];
  };
  CHECK(at(1.0) == doctest::Approx(2.003019e-1).epsilon(5e-5));
  CHECK(at(3.0) == doctest::Approx(6.713695e-2).epsilon(5e-5));
  CHECK(at(20.0) == doctest::Approx(-2.386089e-5).epsilon(5e-4));

  // the profile changes sign (it is not eventually positive)
  bool has_negative = false;
  for (double v : p.value) has_negative = has_negative || v < 0.0;
  CHECK(has_negative);

  // measured tail exponent on a window clear of the sign changes
  std::vector<double> absv(p.value.size());
  for (std::size_t i = 0; i < p.value.size(); ++i) absv[i] = std::abs(p.value[i]);
  const auto tail = fit_decay(p.r, absv, "tail", 24.0, 40.0);
  CAPTURE(tail.slope);
  CHECK(std::abs(tail.slope + 4.0) <= 0.25);
}

TEST_CASE("kernel profile d=2: oracle value, normalization, honest tail") {
  const auto p = kernel_profile(2, 40.0, 161);

  const double oracle =
      integrate(radial_symbol_2d, 0.0, 5.0, 1e-13) / (2.0 * kPi);
  CHECK(std::abs(p.value[0] - oracle) <= 1e-8);

  CHECK(std::abs(p.normalization - 1.0) <= 1e-14);
  CHECK(p.tail_converged);

  std::vector<double> absv(p.value.size());
  for (std::size_t i = 0; i < p.value.size(); ++i) absv[i] = std::abs(p.value[i]);
  const auto tail = fit_decay(p.r, absv, "tail", 24.0, 40.0);
  CAPTURE(tail.slope);
  CHECK(std::abs(tail.slope + 5.0) <= 0.3);
}

TEST_CASE("kernel profile: domain control and convergence flag") {
  CHECK_THROWS_AS(kernel_profile(3, 40.0, 161), config_error);
  CHECK_THROWS_AS(kernel_profile(1, -1.0, 161), config_error);
  CHECK_THROWS_AS(kernel_profile(1, 40.0, 8), config_error);
  CHECK_THROWS_AS(kernel_profile(1, 40.0, 161, 100.0), config_error);
  CHECK_THROWS_AS(kernel_profile(1, 40.0, 161, 32.0), config_error);

  // an undersized torus leaves visible periodization in the tail
  const auto cramped = kernel_profile(1, 28.0, 113, 64.0);
  CHECK_FALSE(cramped.tail_converged);
}

TEST_CASE("kernel profile CSV round trip") {
  const auto p = kernel_profile(1, 10.0, 41);
  const std::string path = "kernel_profile_test.csv";
  write_profile_csv(p, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line.find("# kernel profile: d=1") == 0);
  CHECK(line.find("tail_drift=") != std::string::npos);
  std::getline(in, line);
  CHECK(line == "r,value");
  int rows = 0;
  double r0 = -1.0, v0 = 0.0;
  while (std::getline(in, line)) {
    if (rows == 0) std::sscanf(line.c_str(), "%lf,%lf", &r0, &v0);
    ++rows;
  }
  CHECK(rows == 41);
  CHECK(r0 == 0.0);
  CHECK(v0 == doctest::Approx(p.value[0]).epsilon(1e-15));
  std::remove(path.c_str());
}

TEST_CASE("dual decay constants: single-mode closed forms") {
  auto g = make_grid(1, 64, 2.0 * kPi);
  std::vector<double> v(std::size_t(g->n));
  for (int i = 0; i < g->n; ++i) v[std::size_t(i)] = std::cos(g->x(i));
  std::vector<SpectralField> family;
  family.push_back(SpectralField::from_values(g, std::move(v)));

  const auto rep = verify_linear_bounds(family, {1.0});
  REQUIRE(rep.rows.size() == 5);

  const double c_u = rep.rows[0].constant[0];
  const double c_v = rep.rows[1].constant[0];
  const double c_gv = rep.rows[2].constant[0];
  const double c_dzgv = rep.rows[3].constant[0];

  CHECK(std::abs(c_u - 1.0) <= 0.01);
  CHECK(std::abs(c_v - std::pow(6.0, -1.0 / 3.0) * std::exp(-1.0 / 3.0)) <= 0.01 * c_v);
  CHECK(std::abs(c_gv - std::pow(3.0, -2.0 / 3.0) * std::exp(-2.0 / 3.0)) <= 0.01 * c_gv);
  CHECK(std::abs(c_dzgv - 0.5 * std::exp(-1.0)) <= 0.01 * c_dzgv);
}

TEST_CASE("dual decay constants: zero data gives zero constants") {
  auto g = make_grid(1, 64, 2.0 * kPi);
  std::vector<SpectralField> family;
  family.emplace_back(g);  // zero field
  const auto rep = verify_linear_bounds(family, {1.0, 4.0});
  for (int row : {0, 1, 2, 3}) {
    for (double c : rep.rows[std::size_t(row)].constant) CHECK(c == 0.0);
    CHECK(rep.rows[std::size_t(row)].bounded);
  }
}

TEST_CASE("dual decay constants: random band-limited family is T-stable") {
  auto g = make_grid(1, 512, 64.0);
  std::vector<SpectralField> family;
  for (int s = 0; s < 20; ++s) {
    Rng rng(derive_seed(777, std::uint64_t(s)));
    std::vector<std::complex<double>> c(g->size());
    for (int j = 2; j <= 7; ++j) {
      const std::complex<double> a(rng.normal(), rng.normal());
      c[std::size_t(j)] = a;
      c[std::size_t(g->n - j)] = std::conj(a);
    }
    auto f = SpectralField::from_coeffs(g, std::move(c));
    const double amp = sup_norm(f);
    auto& vv = f.mutable_values();
    for (auto& x : vv) x /= amp;
    family.push_back(std::move(f));
  }

  const auto rep = verify_linear_bounds(family, {1.0, 4.0, 16.0});
  for (const auto& row : rep.rows) {
    for (double c : row.constant) {
      CHECK(std::isfinite(c));
      CHECK(c > 0.0);
    }
    CAPTURE(row.name);
    CAPTURE(row.variation);
    CHECK(row.bounded);
  }
}

TEST_CASE("verify_linear_bounds rejects bad terminal grids") {
  auto g = make_grid(1, 64, 2.0 * kPi);
  std::vector<SpectralField> family;
  family.push_back(random_field(g, 5));
  CHECK_THROWS_AS(verify_linear_bounds(family, {}), config_error);
  CHECK_THROWS_AS(verify_linear_bounds(family, {1.0, -2.0}), config_error);
}
