#include "mslab/functionals.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mslab/errors.hpp"
#include "mslab/kernels.hpp"
#include "mslab/norms.hpp"
#include "mslab/operators.hpp"

namespace mslab {

namespace {

// pointwise metric sqrt(1 + |grad h|^2) and the slope fields
struct Slopes {
  std::vector<SpectralField> g;
  std::vector<double> metric;
};

Slopes slopes_of(const SpectralField& h) {
  Slopes s;
  s.g = gradient(h);
  s.metric.resize(h.grid().size());
  if (h.grid().dim == 1) {
    kernels::metric_1(s.metric, s.g[0].values());
  } else {
    kernels::metric_2(s.metric, s.g[0].values(), s.g[1].values());
  }
  return s;
}

}  // namespace

double energy(const SpectralField& h) {
  const Slopes s = slopes_of(h);
  const std::size_t n = s.metric.size();
  std::vector<double> integrand(n);
  const auto g0 = s.g[0].values();
  if (h.grid().dim == 1) {
    for (std::size_t i = 0; i < n; ++i)
      integrand[i] = g0[i] * g0[i] / (s.metric[i] + 1.0);
  } else {
    const auto g1 = s.g[1].values();
    for (std::size_t i = 0; i < n; ++i)
      integrand[i] =
          (g0[i] * g0[i] + g1[i] * g1[i]) / (s.metric[i] + 1.0);
  }
  return kernels::sum(integrand) * h.grid().cell();
}

double excess_mass(const SpectralField& h) { return l1_norm(h); }

double signed_mass(const SpectralField& h) { return integral(h); }

SpectralField curvature(const SpectralField& h) {
  const Slopes s = slopes_of(h);
  const double worst_metric = kernels::max_abs(s.metric);
  const double lip = std::sqrt(std::max(0.0, worst_metric * worst_metric - 1.0));
  if (!(lip < 1.0)) {
    std::ostringstream os;
    os << "curvature: slope sup " << lip << " is outside the graph regime (< 1 required)";
    throw numerical_error(os.str());
  }
  const TorusGrid& g = h.grid();
  std::vector<std::complex<double>> hc(g.size(), {0.0, 0.0});
  for (int axis = 0; axis < g.dim; ++axis) {
    std::vector<double> q(g.size());
    kernels::div_by(q, s.g[std::size_t(axis)].values(), s.metric);
    const SpectralField dq =
        derivative(SpectralField::from_values(h.grid_ptr(), std::move(q)), axis);
    const auto c = dq.coeffs();
    for (std::size_t i = 0; i < hc.size(); ++i) hc[i] += c[i];
  }
  SpectralField H = SpectralField::from_coeffs(h.grid_ptr(), std::move(hc));
  dealias(H);
  return H;
}

double dissipation_surrogate_curvature(const SpectralField& H) {
  return 2.0 * sobolev_sq(H, 0.5);
}

double dissipation_surrogate(const SpectralField& h) {
  return dissipation_surrogate_curvature(curvature(h));
}

CurvatureNorms curvature_norms(const SpectralField& h, double p) {
  if (!(p >= 1.0)) throw config_error("curvature_norms: p must be >= 1");
  const TorusGrid& g = h.grid();
  const Slopes s = slopes_of(h);
  const SpectralField H = curvature(h);

  CurvatureNorms out;
  const double cell = g.cell();
  out.H_l2 = std::sqrt(kernels::weighted_pow_sum(H.values(), 2.0, s.metric) * cell);
  out.H_l4 = std::pow(kernels::weighted_pow_sum(H.values(), 4.0, s.metric) * cell,
                      0.25);
  out.H_lp = std::pow(kernels::weighted_pow_sum(H.values(), p, s.metric) * cell,
                      1.0 / p);
  out.hess_l2 = std::sqrt(hessian_l2_sq(h));

  // pointwise Frobenius magnitude of the Hessian, then the flat L^p norm
  std::vector<double> frob(g.size(), 0.0);
  if (g.dim == 1) {
    const SpectralField hxx = derivative(derivative(h, 0), 0);
    for (std::size_t i = 0; i < frob.size(); ++i)
      frob[i] = std::abs(hxx.values()[i]);
  } else {
    const SpectralField hx = derivative(h, 0);
    const SpectralField hxx = derivative(hx, 0);
    const SpectralField hxy = derivative(hx, 1);
    const SpectralField hyy = derivative(derivative(h, 1), 1);
    for (std::size_t i = 0; i < frob.size(); ++i) {
      const double a = hxx.values()[i], b = hxy.values()[i],
                   c = hyy.values()[i];
      frob[i] = std::sqrt(a * a + 2.0 * b * b + c * c);
    }
  }
  out.hess_lp =
      std::pow(kernels::weighted_pow_sum(frob, p, {}) * cell, 1.0 / p);
  return out;
}

FunctionalRecord make_record(double t, const SpectralField& h, DSource src,
                             double d_value) {
  FunctionalRecord r;
  r.t = t;
  r.E = energy(h);
  if (src == DSource::elliptic) {
    if (d_value < 0.0)
      throw config_error(
          "make_record: elliptic dissipation value missing (pass d_value >= 0)");
    r.D = d_value;
    r.D_source = "elliptic";
  } else {
    r.D = dissipation_surrogate(h);
    r.D_source = "surrogate";
  }
  r.Vmass = excess_mass(h);
  r.lip = grad_sup(h);
  const int d = h.grid().dim;
  r.dimless = std::pow(r.E, 3 - d) * std::pow(r.D, d);
  r.signed_mass = signed_mass(h);
  r.h_inf = sup_norm(h);
  return r;
}

namespace {
constexpr const char* kLedgerHeader =
    "t,E,D,D_source,Vmass,lip,dimless,signed_mass,h_inf";
}

void write_ledger_csv(const std::string& path,
                      std::span<const FunctionalRecord> rows) {
  std::ofstream out(path);
  if (!out) throw config_error("write_ledger_csv: cannot open " + path);
  out << std::setprecision(17);
  out << kLedgerHeader << "\n";
  for (const auto& r : rows) {
    out << r.t << "," << r.E << "," << r.D << "," << r.D_source << ","
        << r.Vmass << "," << r.lip << "," << r.dimless << "," << r.signed_mass
        << "," << r.h_inf << "\n";
  }
  if (!out) throw config_error("write_ledger_csv: write failed for " + path);
}

std::vector<FunctionalRecord> read_ledger_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("read_ledger_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kLedgerHeader)
    throw config_error("read_ledger_csv: bad header in " + path +
                       " (expected '" + std::string(kLedgerHeader) + "')");
  std::vector<FunctionalRecord> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    FunctionalRecord r;
    std::string field;
    auto next = [&](const char* what) {
      if (!std::getline(ss, field, ','))
        throw config_error("read_ledger_csv: " + path + ":" +
                           std::to_string(line_no) + ": missing " + what);
      return field;
    };
    r.t = std::stod(next("t"));
    r.E = std::stod(next("E"));
    r.D = std::stod(next("D"));
    r.D_source = next("D_source");
    r.Vmass = std::stod(next("Vmass"));
    r.lip = std::stod(next("lip"));
    r.dimless = std::stod(next("dimless"));
    r.signed_mass = std::stod(next("signed_mass"));
    r.h_inf = std::stod(next("h_inf"));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace mslab
