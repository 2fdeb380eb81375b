#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mslab/errors.hpp"
#include "mslab/functionals.hpp"
#include "mslab/report.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path work =
    fs::temp_directory_path() / ("mslab_cli_" + std::to_string(::getpid()));

struct WorkDir {
  WorkDir() {
    fs::remove_all(work);
    fs::create_directories(work);
  }
  ~WorkDir() { fs::remove_all(work); }
} work_guard;

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

/// Run the CLI, returning its exit status; stdout+stderr land in `captured`.
int run_cli(const std::string& args, std::string* captured = nullptr) {
  const fs::path log = work / "cli_output.txt";
  const std::string cmd =
      std::string(MSLAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  if (captured) *captured = slurp(log);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

}  // namespace

TEST_CASE("usage errors exit with status 1") {
  CHECK(run_cli("") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("evolve --config /does/not/exist.cfg") == 1);

  write_file(work / "bad.cfg", "dim = 1\nn = 100\nL = 32\nt_end = 1\n");
  std::string out;
  CHECK(run_cli("evolve --config " + (work / "bad.cfg").string(), &out) == 1);
  CHECK(out.find("power of two") != std::string::npos);

  CHECK(run_cli("--help") == 0);
}

TEST_CASE("evolve: flat run yields a zero ledger and passes checks") {
  write_file(work / "flat.cfg",
             "dim = 1\nn = 64\nL = 32\nt_end = 0.5\ninit_family = flat\n");
  const fs::path dir = work / "flat_run";
  std::string out;
  CHECK(run_cli("evolve --config " + (work / "flat.cfg").string() + " --out " +
                    dir.string() + " --check",
                &out) == 0);
  CHECK(out.find("checks passed") != std::string::npos);

  auto rows = mslab::read_ledger_csv((dir / "series.csv").string());
  REQUIRE(!rows.empty());
  for (const auto& r : rows) {
    CHECK(r.E == 0.0);
    CHECK(r.h_inf == 0.0);
  }
  CHECK(fs::exists(dir / "manifest.txt"));
  CHECK(fs::exists(dir / "nodes.csv"));
}

TEST_CASE("evolve, fit, report pipeline") {
  write_file(work / "run.cfg",
             "dim = 1\nn = 128\nL = 32\nt_end = 1\ninit_family = gaussian\n"
             "init_amplitude = 0.3\nsnapshots = 3\n");
  const fs::path dir = work / "run1";
  CHECK(run_cli("evolve --config " + (work / "run.cfg").string() + " --out " +
                dir.string() + " --check") == 0);
  CHECK(fs::exists(dir / "snapshots" / "snap_000.csv"));

  std::string out;
  SUBCASE("fit without a window names the available range") {
    CHECK(run_cli("fit --out " + dir.string(), &out) == 1);
    CHECK(out.find("series spans") != std::string::npos);
  }
  SUBCASE("fit with a window writes fits.csv") {
    CHECK(run_cli("fit --out " + dir.string() + " --tlo 0.05 --thi 0.9",
                  &out) == 0);
    CHECK(out.find("slope(E)") != std::string::npos);
    CHECK(fs::exists(dir / "fits.csv"));

    CHECK(run_cli("report --out " + dir.string() + " --title panel") == 0);
    const std::string svg = slurp(dir / "report.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("t^-4/3") != std::string::npos);
    CHECK(svg.find("slope(E)") != std::string::npos);
  }
  SUBCASE("report without a ledger fails") {
    CHECK(run_cli("report --out " + (work / "empty_dir").string()) == 1);
  }
}

TEST_CASE("fit on an all-zero ledger is a numerical failure") {
  write_file(work / "flat2.cfg",
             "dim = 1\nn = 64\nL = 32\nt_end = 0.5\ninit_family = flat\n");
  const fs::path dir = work / "flat_run2";
  REQUIRE(run_cli("evolve --config " + (work / "flat2.cfg").string() +
                  " --out " + dir.string()) == 0);
  CHECK(run_cli("fit --out " + dir.string() + " --tlo 0.01 --thi 0.4") == 2);
}

TEST_CASE("kernel subcommand and its convergence gate") {
  const fs::path dir = work / "kern";
  std::string out;
  CHECK(run_cli("kernel --kdim 1 --rmax 10 --samples 32 --check --out " +
                    dir.string(),
                &out) == 0);
  CHECK(out.find("converged") != std::string::npos);
  CHECK(fs::exists(dir / "kernel_d1.csv"));

  // an undersized synthesis box cannot converge its tail
  CHECK(run_cli("kernel --kdim 1 --rmax 10 --samples 32 --domain-hint 32 "
                "--check",
                &out) == 3);
  CHECK(out.find("check failed") != std::string::npos);
}

TEST_CASE("ineq subcommand emits the suite table and report file") {
  const fs::path dir = work / "ineq";
  std::string out;
  CHECK(run_cli("ineq --samples 8 --check --out " + dir.string(), &out) == 0);
  CHECK(out.find("eed_d1") != std::string::npos);
  CHECK(out.find("tint") != std::string::npos);
  CHECK(fs::exists(dir / "ineq_report.csv"));
}

TEST_CASE("linear subcommand fits the semigroup decay") {
  write_file(work / "lin.cfg",
             "dim = 1\nn = 512\nL = 100\nt_end = 50\ndt_init = 0.01\n"
             "init_family = gaussian\ninit_amplitude = 0.05\ninit_sigma = 1\n"
             "fit_lo = 5\nfit_hi = 40\n");
  std::string out;
  CHECK(run_cli("linear --config " + (work / "lin.cfg").string() + " --check",
                &out) == 0);
  CHECK(out.find("checks passed") != std::string::npos);
}

TEST_CASE("seed override changes a randomized run") {
  write_file(work / "mb.cfg",
             "dim = 1\nn = 128\nL = 64\nt_end = 0.2\ninit_family = multibump\n"
             "init_amplitude = 0.3\n");
  const fs::path d1 = work / "seed1";
  const fs::path d2 = work / "seed2";
  REQUIRE(run_cli("evolve --config " + (work / "mb.cfg").string() +
                  " --seed 11 --out " + d1.string()) == 0);
  REQUIRE(run_cli("evolve --config " + (work / "mb.cfg").string() +
                  " --seed 12 --out " + d2.string()) == 0);
  auto r1 = mslab::read_ledger_csv((d1 / "series.csv").string());
  auto r2 = mslab::read_ledger_csv((d2 / "series.csv").string());
  REQUIRE(!r1.empty());
  REQUIRE(!r2.empty());
  CHECK(r1.front().E != r2.front().E);
}

TEST_CASE("report writer rejects unusable input") {
  const fs::path svg = work / "direct.svg";
  std::vector<mslab::FunctionalRecord> rows;
  CHECK_THROWS_AS(mslab::write_report_svg(svg.string(), rows),
                  mslab::config_error);

  mslab::FunctionalRecord r{};
  r.t = 1.0;
  r.E = 2.0;
  rows.push_back(r);  // single positive time: no span to plot
  CHECK_THROWS_AS(mslab::write_report_svg(svg.string(), rows),
                  mslab::config_error);

  r.t = 10.0;
  r.E = 0.5;
  rows.push_back(r);
  CHECK_THROWS_AS(
      mslab::write_report_svg("/nonexistent-dir/x/report.svg", rows),
      mslab::config_error);
  mslab::write_report_svg(svg.string(), rows);
  std::ifstream in(svg);
  std::string body((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(body.find("</svg>") != std::string::npos);
}
