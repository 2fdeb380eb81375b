#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mslab/config.hpp"
#include "mslab/errors.hpp"
#include "mslab/fit.hpp"
#include "mslab/functionals.hpp"
#include "mslab/grid.hpp"
#include "mslab/ineq.hpp"
#include "mslab/kernels.hpp"
#include "mslab/linear_flow.hpp"
#include "mslab/norms.hpp"
#include "mslab/report.hpp"
#include "mslab/solver.hpp"

namespace fs = std::filesystem;
using namespace mslab;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir;
  bool check = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool threads_set = false;
};

std::string num(double v, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

/// Config assembly shared by every subcommand: file, then flag overrides,
/// then a full re-validation pass.
RunConfig make_cfg(const GlobalOpts& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) cfg = load_config(g.config_path);
  if (g.seed_set) cfg.seed = g.seed;
  if (g.threads_set) cfg.threads = g.threads;
  if (!g.out_dir.empty()) cfg.out = g.out_dir;
  return parse_config(manifest_text(cfg));
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw config_error("cannot create output directory '" + dir +
                       "': " + ec.message());
}

std::vector<std::uint8_t> read_flags_csv(const std::string& path) {
  std::ifstream is(path);
  std::vector<std::uint8_t> flags;
  if (!is) return flags;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    flags.push_back(line[comma + 1] == '1' ? 1 : 0);
  }
  return flags;
}

void write_fits_csv(const std::string& path,
                    const std::vector<FitResult>& fits) {
  std::ofstream os(path);
  if (!os) throw config_error("cannot write '" + path + "'");
  os << "quantity,slope,intercept,stderr,t_lo,t_hi,n_points\n"
     << std::setprecision(17);
  for (const FitResult& f : fits)
    os << f.quantity << ',' << f.slope << ',' << f.intercept << ','
       << f.slope_stderr << ',' << f.t_lo << ',' << f.t_hi << ','
       << f.n_points << '\n';
  os.flush();
  if (!os) throw config_error("cannot write '" + path + "'");
}

std::vector<FitResult> read_fits_csv(const std::string& path) {
  std::ifstream is(path);
  std::vector<FitResult> fits;
  if (!is) return fits;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    FitResult f;
    std::string field;
    if (!std::getline(ls, f.quantity, ',')) continue;
    auto next = [&](double& v) {
      std::getline(ls, field, ',');
      v = std::stod(field);
    };
    next(f.slope);
    next(f.intercept);
    next(f.slope_stderr);
    next(f.t_lo);
    next(f.t_hi);
    std::getline(ls, field, ',');
    f.n_points = std::stoi(field);
    fits.push_back(std::move(f));
  }
  return fits;
}

/// One quantity column of the unflagged ledger rows.
void column(const std::vector<FunctionalRecord>& rows,
            const std::vector<std::uint8_t>& flags,
            double (*sel)(const FunctionalRecord&), std::vector<double>& t,
            std::vector<double>& y) {
  t.clear();
  y.clear();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i < flags.size() && flags[i]) continue;
    t.push_back(rows[i].t);
    y.push_back(sel(rows[i]));
  }
}

std::vector<FitResult> fit_ledger(const std::vector<FunctionalRecord>& rows,
                                  const std::vector<std::uint8_t>& flags,
                                  double t_lo, double t_hi,
                                  std::vector<std::string>* skipped) {
  struct Q {
    const char* name;
    double (*sel)(const FunctionalRecord&);
  };
  const Q quantities[] = {
      {"E", [](const FunctionalRecord& r) { return r.E; }},
      {"D", [](const FunctionalRecord& r) { return r.D; }},
      {"Vmass", [](const FunctionalRecord& r) { return r.Vmass; }},
      {"h_inf", [](const FunctionalRecord& r) { return r.h_inf; }},
      {"lip", [](const FunctionalRecord& r) { return r.lip; }},
  };
  std::vector<FitResult> fits;
  std::vector<double> t, y;
  for (const Q& q : quantities) {
    column(rows, flags, q.sel, t, y);
    try {
      fits.push_back(fit_decay(t, y, q.name, t_lo, t_hi));
    } catch (const numerical_error& err) {
      if (skipped) skipped->push_back(std::string(q.name) + ": " + err.what());
    }
  }
  return fits;
}

void print_fits(const std::vector<FitResult>& fits,
                const std::vector<std::string>& skipped) {
  for (const FitResult& f : fits)
    std::cout << "slope(" << f.quantity << ") = " << num(f.slope) << " +- "
              << num(f.slope_stderr, 3) << "  on [" << num(f.t_lo) << ", "
              << num(f.t_hi) << "], " << f.n_points << " points\n";
  for (const std::string& s : skipped) std::cout << "skipped " << s << '\n';
}

const FitResult& find_fit(const std::vector<FitResult>& fits,
                          const std::string& name) {
  for (const FitResult& f : fits)
    if (f.quantity == name) return f;
  throw check_failure("no usable fit for " + name +
                      " (values nonpositive in the window?)");
}

// ---------------------------------------------------------------- linear

int cmd_linear(const GlobalOpts& g) {
  RunConfig cfg = make_cfg(g);
  set_num_threads(cfg.threads);
  SpectralField h0 = initial_data(cfg);

  std::vector<double> times{0.0};
  const double ratio = std::pow(10.0, 1.0 / cfg.rows_per_decade);
  for (double t = cfg.dt_init; t < cfg.t_end; t *= ratio) times.push_back(t);
  times.push_back(cfg.t_end);

  std::vector<FunctionalRecord> rows;
  std::vector<std::uint8_t> flags;
  bool breached = false;
  for (double t : times) {
    SpectralField h = t == 0.0 ? h0 : evolve_linear(h0, t);
    rows.push_back(make_record(t, h, DSource::surrogate));
    breached = breached || boundary_contaminated(h, cfg.contamination_tol);
    flags.push_back(breached ? 1 : 0);
  }

  std::vector<FitResult> fits;
  std::vector<std::string> skipped;
  const bool has_window = cfg.fit_lo > 0.0 && cfg.fit_hi > cfg.fit_lo;
  if (has_window)
    fits = fit_ledger(rows, flags, cfg.fit_lo, cfg.fit_hi, &skipped);

  std::cout << "linear run: dim " << cfg.dim << ", n " << cfg.n << ", L "
            << cfg.L << ", " << rows.size() << " rows to t = " << cfg.t_end
            << '\n';
  std::cout << "final h_inf = " << num(rows.back().h_inf) << ", E = "
            << num(rows.back().E) << '\n';
  print_fits(fits, skipped);

  if (!cfg.out.empty()) {
    ensure_dir(cfg.out);
    const std::string base = cfg.out + "/";
    write_ledger_csv(base + "series.csv", rows);
    {
      std::ofstream os(base + "flags.csv");
      if (!os) throw config_error("cannot write '" + base + "flags.csv'");
      os << "t,flagged\n" << std::setprecision(17);
      for (std::size_t i = 0; i < rows.size(); ++i)
        os << rows[i].t << ',' << int(flags[i]) << '\n';
    }
    if (!fits.empty()) write_fits_csv(base + "fits.csv", fits);
    std::ofstream os(base + "manifest.txt");
    if (!os) throw config_error("cannot write '" + base + "manifest.txt'");
    os << manifest_text(cfg, {{"mode", "linear"}});
    std::cout << "artifacts in " << cfg.out << '\n';
  }

  if (g.check) {
    if (!has_window)
      throw check_failure(
          "linear --check needs a fit window (set fit_lo and fit_hi)");
    std::vector<std::string> bad;
    const double d = cfg.dim;
    const FitResult& fh = find_fit(fits, "h_inf");
    if (std::abs(fh.slope + d / 3.0) > 0.05)
      bad.push_back("h_inf slope " + num(fh.slope) + " not within 0.05 of " +
                    num(-d / 3.0));
    const FitResult& fl = find_fit(fits, "lip");
    if (std::abs(fl.slope + (d + 1.0) / 3.0) > 0.05)
      bad.push_back("lip slope " + num(fl.slope) + " not within 0.05 of " +
                    num(-(d + 1.0) / 3.0));
    if (!bad.empty()) {
      std::string msg = "linear checks failed:";
      for (const std::string& b : bad) msg += "\n  " + b;
      throw check_failure(msg);
    }
    std::cout << "checks passed: h_inf and lip decay at the expected rates\n";
  }
  return 0;
}

// ---------------------------------------------------------------- evolve

int cmd_evolve(const GlobalOpts& g) {
  RunConfig cfg = make_cfg(g);
  RunOutput out = run_simulation(cfg);

  std::cout << "evolve run: dim " << cfg.dim << ", n " << cfg.n << ", scheme "
            << out.scheme << '\n';
  std::cout << "steps = " << out.steps << " (rejections " << out.rejections
            << "), rows = " << out.series.size() << ", t reached "
            << num(out.final_state.t) << '\n';
  if (!out.series.empty()) {
    const FunctionalRecord& last = out.series.back();
    std::cout << "final E = " << num(last.E) << ", D = " << num(last.D)
              << ", Vmass = " << num(last.Vmass) << ", lip = "
              << num(last.lip) << '\n';
  }
  if (out.first_breach_t >= 0.0)
    std::cout << "boundary contamination from t = " << num(out.first_breach_t)
              << "; later rows flagged\n";
  if (!cfg.out.empty()) std::cout << "artifacts in " << cfg.out << '\n';

  if (!out.abort_reason.empty()) {
    std::cerr << "aborted: " << out.abort_reason << '\n';
    return 2;
  }

  if (g.check) {
    std::vector<std::string> bad;
    const auto& s = out.series;
    const double V0 = s.empty() ? 0.0 : s.front().Vmass;
    const double sm0 = s.empty() ? 0.0 : s.front().signed_mass;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!(s[i].lip < 1.0))
        bad.push_back("row " + std::to_string(i) + ": slope sup >= 1");
      if (i > 0 && s[i].E > s[i - 1].E * (1.0 + 1e-8))
        bad.push_back("row " + std::to_string(i) + ": excess area rose to " +
                      num(s[i].E) + " from " + num(s[i - 1].E));
      if (s[i].Vmass > 2.0 * V0 + 1e-12)
        bad.push_back("row " + std::to_string(i) + ": excess mass " +
                      num(s[i].Vmass) + " above twice its start " + num(V0));
      if (std::abs(s[i].signed_mass - sm0) >
          1e-8 * V0 * std::max(1.0, s[i].t))
        bad.push_back("row " + std::to_string(i) + ": signed mass drifted by " +
                      num(std::abs(s[i].signed_mass - sm0)));
    }
    if (!bad.empty()) {
      std::string msg = "evolve checks failed:";
      for (const std::string& b : bad) msg += "\n  " + b;
      throw check_failure(msg);
    }
    std::cout << "checks passed: area monotone, mass conserved, slope gated,"
                 " excess mass bounded\n";
  }
  return 0;
}

// ---------------------------------------------------------------- kernel

int cmd_kernel(const GlobalOpts& g, int kdim, double rmax, int samples,
               double domain_hint) {
  if (g.threads_set) set_num_threads(g.threads);
  KernelProfile p = kernel_profile(kdim, rmax, samples, domain_hint);
  std::cout << "kernel profile: dim " << p.dim << ", " << p.r.size()
            << " radii to " << num(p.r.back()) << '\n';
  std::cout << "normalization = " << num(p.normalization, 12)
            << ", tail drift = " << num(p.tail_drift, 3) << " ("
            << (p.tail_converged ? "converged" : "NOT converged")
            << "), synthesis box " << num(p.domain) << '\n';

  std::string dir = g.out_dir;
  if (dir.empty() && !g.config_path.empty()) dir = make_cfg(g).out;
  if (!dir.empty()) {
    ensure_dir(dir);
    const std::string path =
        dir + "/kernel_d" + std::to_string(kdim) + ".csv";
    write_profile_csv(p, path);
    std::cout << "wrote " << path << '\n';
  }

  if (g.check) {
    std::vector<std::string> bad;
    if (std::abs(p.normalization - 1.0) > 1e-6)
      bad.push_back("normalization " + num(p.normalization, 12) +
                    " off unity by more than 1e-6");
    if (!p.tail_converged)
      bad.push_back("tail not converged under domain doubling (drift " +
                    num(p.tail_drift, 3) + ")");
    if (!bad.empty()) {
      std::string msg = "kernel checks failed:";
      for (const std::string& b : bad) msg += "\n  " + b;
      throw check_failure(msg);
    }
    std::cout << "checks passed: unit mass and converged tail\n";
  }
  return 0;
}

// ---------------------------------------------------------------- ineq

int cmd_ineq(const GlobalOpts& g, int samples) {
  RunConfig cfg = make_cfg(g);
  set_num_threads(cfg.threads);
  const std::uint64_t seed = cfg.seed;
  const int n1 = samples;
  const int n2 = std::max(8, samples / 2);
  const int ne = std::max(6, samples / 16);

  GridPtr g1 = make_grid(1, 256, 64.0);
  GridPtr g2 = make_grid(2, 64, 32.0);
  GridPtr gsmall = make_grid(1, 128, 64.0);

  const auto e1 = make_ensemble(g1, n1, seed);
  const auto e2 = make_ensemble(g2, n2, seed);
  const auto es = make_ensemble(gsmall, ne, seed + 1);

  std::vector<InequalityReport> reports;
  reports.push_back(check_eed(e1));
  reports.push_back(check_eed(e2));
  reports.push_back(check_eed(es, DissipationRoute::elliptic));
  for (const char* item : {"ii", "iii", "iv_1d"})
    reports.push_back(check_gns(item, e1));
  for (const char* item : {"i", "ii", "iii", "iv", "v"})
    reports.push_back(check_gns(item, e2, 4.0));
  reports.push_back(check_v2(e1));
  reports.push_back(check_v2(e2));
  reports.push_back(check_hessian_by_curvature(e1, 4.0));
  reports.push_back(check_hessian_by_curvature(e2, 4.0));
  reports.push_back(check_curvature_lp(e2, 2.0));
  reports.push_back(check_curvature_lp(e2, 4.0));
  reports.push_back(
      check_tint({0.5, 0.75, 0.9}, {0.5, 0.6}, {1.0, 10.0, 100.0}));

  std::cout << std::left << std::setw(28) << "inequality" << std::right
            << std::setw(8) << "samples" << std::setw(14) << "max_ratio"
            << std::setw(12) << "drift" << '\n';
  for (const InequalityReport& r : reports)
    std::cout << std::left << std::setw(28) << r.inequality_id << std::right
              << std::setw(8) << r.n_samples << std::setw(14)
              << num(r.max_ratio) << std::setw(12)
              << num(r.doubling_drift, 3) << '\n';

  if (!cfg.out.empty()) {
    ensure_dir(cfg.out);
    const std::string path = cfg.out + "/ineq_report.csv";
    write_inequality_csv(path, reports);
    std::cout << "wrote " << path << '\n';
  }

  if (g.check) {
    std::vector<std::string> bad;
    for (const InequalityReport& r : reports) {
      if (!(std::isfinite(r.max_ratio) && r.max_ratio > 0.0))
        bad.push_back(r.inequality_id + ": max ratio not finite/positive");
      // the hessian-by-curvature rows are informative (flat-measure
      // comparison), not gating
      const bool informative =
          r.inequality_id.rfind("hessian_by_curvature", 0) == 0;
      if (!informative && std::abs(r.doubling_drift) > 0.10)
        bad.push_back(r.inequality_id + ": grid-doubling drift " +
                      num(r.doubling_drift, 3) + " above 10%");
      if (r.inequality_id == "tint" && std::abs(r.max_ratio - 1.0) > 1e-8)
        bad.push_back("tint: worst Beta-normalized ratio " +
                      num(r.max_ratio, 12) + " off unity by more than 1e-8");
    }
    if (!bad.empty()) {
      std::string msg = "inequality checks failed:";
      for (const std::string& b : bad) msg += "\n  " + b;
      throw check_failure(msg);
    }
    std::cout << "checks passed: ratios finite and refinement-stable\n";
  }
  return 0;
}

// ------------------------------------------------------------------ fit

int cmd_fit(const GlobalOpts& g, double tlo, double thi) {
  RunConfig cfg;
  std::string dir = g.out_dir;
  bool have_cfg = false;
  if (!g.config_path.empty()) {
    cfg = load_config(g.config_path);
    have_cfg = true;
    if (dir.empty()) dir = cfg.out;
  }
  if (dir.empty())
    throw config_error(
        "fit: pass --out RUN_DIR (or a --config whose out names one)");
  if (!have_cfg && fs::exists(dir + "/manifest.txt")) {
    cfg = load_config(dir + "/manifest.txt");
    have_cfg = true;
  }

  std::vector<FunctionalRecord> rows = read_ledger_csv(dir + "/series.csv");
  std::vector<std::uint8_t> flags = read_flags_csv(dir + "/flags.csv");
  if (rows.empty()) throw config_error("fit: '" + dir + "/series.csv' is empty");

  double t_lo = tlo > 0.0 ? tlo : cfg.fit_lo;
  double t_hi = thi > 0.0 ? thi : cfg.fit_hi;
  if (!(t_lo > 0.0 && t_hi > t_lo))
    throw config_error("fit: no window declared (pass --tlo/--thi or set "
                       "fit_lo/fit_hi); series spans [" +
                       num(rows.front().t) + ", " + num(rows.back().t) + "]");
  if (have_cfg) {
    // route the window through the config validator so the gap guard applies
    cfg.fit_lo = t_lo;
    cfg.fit_hi = t_hi;
    if (cfg.t_end < t_hi) cfg.t_end = t_hi;
    cfg = parse_config(manifest_text(cfg));
  }

  std::vector<std::string> skipped;
  std::vector<FitResult> fits = fit_ledger(rows, flags, t_lo, t_hi, &skipped);
  if (fits.empty())
    throw numerical_error("fit: no quantity had positive data in [" +
                          num(t_lo) + ", " + num(t_hi) + "]");
  print_fits(fits, skipped);
  write_fits_csv(dir + "/fits.csv", fits);
  std::cout << "wrote " << dir << "/fits.csv\n";
  return 0;
}

// --------------------------------------------------------------- report

int cmd_report(const GlobalOpts& g, const std::string& title) {
  RunConfig cfg;
  std::string dir = g.out_dir;
  if (!g.config_path.empty()) {
    cfg = load_config(g.config_path);
    if (dir.empty()) dir = cfg.out;
  }
  if (dir.empty())
    throw config_error(
        "report: pass --out RUN_DIR (or a --config whose out names one)");
  std::string label = title;
  if (label.empty() && fs::exists(dir + "/manifest.txt"))
    label = load_config(dir + "/manifest.txt").label;

  std::vector<FunctionalRecord> rows = read_ledger_csv(dir + "/series.csv");
  if (rows.empty())
    throw config_error("report: '" + dir + "/series.csv' is empty");
  std::vector<std::uint8_t> flags = read_flags_csv(dir + "/flags.csv");
  std::vector<FitResult> fits = read_fits_csv(dir + "/fits.csv");

  const std::string path = dir + "/report.svg";
  write_report_svg(path, rows, flags, fits, label);
  std::cout << "wrote " << path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mslab: spectral laboratory for the relaxation of nearly flat\n"
      "interfaces under Mullins-Sekerka dynamics"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path,
                 "key = value experiment description");
  app.add_option("--out", g.out_dir, "output directory (overrides the config)");
  app.add_flag("--check", g.check,
               "verify acceptance properties; violations exit with status 3");
  auto* seed_opt = app.add_option("--seed", g.seed, "root seed override");
  auto* threads_opt =
      app.add_option("--threads", g.threads, "worker threads for kernels");

  auto* sc_linear =
      app.add_subcommand("linear", "evolve by the exact relaxation semigroup");
  auto* sc_evolve =
      app.add_subcommand("evolve", "nonlinear interface evolution to t_end");
  auto* sc_kernel = app.add_subcommand(
      "kernel", "tabulate the self-similar relaxation kernel");
  int kdim = 1, ksamples = 256;
  double krmax = 20.0, khint = 0.0;
  sc_kernel->add_option("--kdim", kdim, "kernel dimension (1 or 2)");
  sc_kernel->add_option("--rmax", krmax, "largest tabulated radius");
  sc_kernel->add_option("--samples", ksamples, "number of radii");
  sc_kernel->add_option("--domain-hint", khint,
                        "synthesis box override (power of two)");
  auto* sc_ineq = app.add_subcommand(
      "ineq", "run the functional-inequality sampling suites");
  int isamples = 200;
  sc_ineq->add_option("--samples", isamples, "ensemble size per suite");
  auto* sc_fit =
      app.add_subcommand("fit", "regress decay exponents of a run ledger");
  double tlo = 0.0, thi = 0.0;
  sc_fit->add_option("--tlo", tlo, "fit window start (overrides config)");
  sc_fit->add_option("--thi", thi, "fit window end (overrides config)");
  auto* sc_report =
      app.add_subcommand("report", "render a run ledger as an SVG panel");
  std::string title;
  sc_report->add_option("--title", title, "panel title");

  for (CLI::App* sc :
       {sc_linear, sc_evolve, sc_kernel, sc_ineq, sc_fit, sc_report})
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  g.seed_set = seed_opt->count() > 0;
  g.threads_set = threads_opt->count() > 0;

  try {
    if (sc_linear->parsed()) return cmd_linear(g);
    if (sc_evolve->parsed()) return cmd_evolve(g);
    if (sc_kernel->parsed()) return cmd_kernel(g, kdim, krmax, ksamples, khint);
    if (sc_ineq->parsed()) return cmd_ineq(g, isamples);
    if (sc_fit->parsed()) return cmd_fit(g, tlo, thi);
    if (sc_report->parsed()) return cmd_report(g, title);
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const check_failure& e) {
    std::cerr << "check failed: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
