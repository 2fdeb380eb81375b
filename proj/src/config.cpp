#include "mslab/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mslab/errors.hpp"

namespace mslab {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& want) {
  std::ostringstream os;
  os << "config: key '" << key << "' = '" << value << "' is not " << want;
  throw config_error(os.str());
}

int to_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    bad(key, v, "an integer");
  }
  if (used != v.size()) bad(key, v, "an integer");
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long x = 0;
  if (!v.empty() && v[0] == '-') bad(key, v, "a nonnegative integer");
  try {
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    bad(key, v, "a nonnegative integer");
  }
  if (used != v.size()) bad(key, v, "a nonnegative integer");
  return x;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    bad(key, v, "a number");
  }
  if (used != v.size() || !std::isfinite(x)) bad(key, v, "a finite number");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  bad(key, v, "on/off");
}

bool power_of_two(int n) { return n >= 8 && (n & (n - 1)) == 0; }

void apply(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "dim") c.dim = to_int(key, value);
  else if (key == "n") c.n = to_int(key, value);
  else if (key == "L") c.L = to_double(key, value);
  else if (key == "scheme") c.scheme = value;
  else if (key == "t_end") c.t_end = to_double(key, value);
  else if (key == "dt_init") c.dt_init = to_double(key, value);
  else if (key == "change_target") c.change_target = to_double(key, value);
  else if (key == "energy_tol") c.energy_tol = to_double(key, value);
  else if (key == "depth_factor") c.depth_factor = to_double(key, value);
  else if (key == "snapshots") c.snapshots = to_int(key, value);
  else if (key == "rows_per_decade") c.rows_per_decade = to_int(key, value);
  else if (key == "fit_lo") c.fit_lo = to_double(key, value);
  else if (key == "fit_hi") c.fit_hi = to_double(key, value);
  else if (key == "gap_guard") c.gap_guard = to_bool(key, value);
  else if (key == "contamination_tol") c.contamination_tol = to_double(key, value);
  else if (key == "out") c.out = value;
  else if (key == "label") c.label = value;
  else if (key == "seed") c.seed = to_u64(key, value);
  else if (key == "threads") c.threads = to_int(key, value);
  else if (key == "init_family") c.init_family = value;
  else if (key == "init_amplitude") c.init_amplitude = to_double(key, value);
  else if (key == "init_sigma") c.init_sigma = to_double(key, value);
  else if (key == "init_bumps") c.init_bumps = to_int(key, value);
  else if (key == "init_gamma") c.init_gamma = to_double(key, value);
  else if (key == "init_jmax") c.init_jmax = to_int(key, value);
  else if (key == "init_energy") c.init_energy = to_double(key, value);
  else if (key == "lip_bound") c.lip_bound = to_double(key, value);
  else {
    std::ostringstream os;
    os << "config: unknown key '" << key << "'";
    throw config_error(os.str());
  }
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw config_error("config: " + msg); };

  if (c.dim != 1 && c.dim != 2) fail("dim must be 1 or 2");
  if (!power_of_two(c.n)) {
    std::ostringstream os;
    os << "n = " << c.n << " is not a power of two (grid sizes must be powers of two >= 8)";
    fail(os.str());
  }
  if (!(c.L > 0.0)) fail("L must be positive");
  if (c.scheme != "auto" && c.scheme != "flat_dtn" && c.scheme != "elliptic")
    fail("scheme must be auto, flat_dtn, or elliptic");
  if (c.resolved_scheme() == "elliptic" && c.dim != 1)
    fail("scheme = elliptic requires dim = 1 (no two-phase solve over a 2-d interface)");
  if (!(c.t_end > 0.0)) fail("t_end must be positive");
  if (!(c.dt_init > 0.0) || c.dt_init >= c.t_end) fail("dt_init must lie in (0, t_end)");
  if (!(c.change_target > 0.0)) fail("change_target must be positive");
  if (!(c.energy_tol >= 0.0)) fail("energy_tol must be nonnegative");
  if (!(c.depth_factor >= 2.0)) fail("depth_factor must be >= 2");
  if (c.snapshots < 0) fail("snapshots must be nonnegative");
  if (c.rows_per_decade < 1) fail("rows_per_decade must be >= 1");
  if (c.fit_lo != 0.0 || c.fit_hi != 0.0) {
    if (!(c.fit_lo > 0.0) || !(c.fit_hi > c.fit_lo)) fail("fit window needs 0 < fit_lo < fit_hi");
    if (c.fit_hi > c.t_end) fail("fit_hi must not exceed t_end");
    if (c.gap_guard && c.gap_guard_value() > 0.04) {
      std::ostringstream os;
      os << "fit window breaches the gap guard: 2|k_min|^3 * fit_hi = " << c.gap_guard_value()
         << " > 0.04 (enlarge L, shrink fit_hi, or set gap_guard = off)";
      fail(os.str());
    }
  }
  if (!(c.contamination_tol > 0.0 && c.contamination_tol <= 1.0))
    fail("contamination_tol must lie in (0, 1]");
  if (c.label.empty() || c.label.find('/') != std::string::npos)
    fail("label must be nonempty and contain no '/'");
  if (c.threads < 1) fail("threads must be >= 1");
  if (c.init_family != "gaussian" && c.init_family != "multibump" &&
      c.init_family != "band_random" && c.init_family != "flat")
    fail("init_family must be gaussian, multibump, band_random, or flat");
  if (!(c.init_amplitude >= 0.0)) fail("init_amplitude must be nonnegative");
  if (!(c.init_sigma > 0.0)) fail("init_sigma must be positive");
  if (c.init_bumps < 1) fail("init_bumps must be >= 1");
  if (!(c.init_gamma >= 0.5 && c.init_gamma <= 3.0)) fail("init_gamma must lie in [0.5, 3]");
  if (c.init_jmax < 1) fail("init_jmax must be >= 1");
  if (!(c.init_energy >= 0.0)) fail("init_energy must be nonnegative");
  if (!(c.lip_bound > 0.0 && c.lip_bound <= 1.0)) fail("lip_bound must lie in (0, 1]");
}

}  // namespace

std::string RunConfig::resolved_scheme() const {
  if (scheme != "auto") return scheme;
  return (dim == 1 && n < 1024) ? "elliptic" : "flat_dtn";
}

double RunConfig::gap_guard_value() const {
  const double kmin = 2.0 * kPi / L;
  return 2.0 * kmin * kmin * kmin * fit_hi;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << "config: line " << lineno << " is not of the form key = value: '" << stripped << "'";
      throw config_error(os.str());
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream os;
      os << "config: line " << lineno << " has an empty key";
      throw config_error(os.str());
    }
    apply(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string manifest_text(const RunConfig& c,
                          const std::vector<std::pair<std::string, std::string>>& notes) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "dim = " << c.dim << "\n";
  os << "n = " << c.n << "\n";
  os << "L = " << c.L << "\n";
  os << "scheme = " << c.scheme << "\n";
  os << "t_end = " << c.t_end << "\n";
  os << "dt_init = " << c.dt_init << "\n";
  os << "change_target = " << c.change_target << "\n";
  os << "energy_tol = " << c.energy_tol << "\n";
  os << "depth_factor = " << c.depth_factor << "\n";
  os << "snapshots = " << c.snapshots << "\n";
  os << "rows_per_decade = " << c.rows_per_decade << "\n";
  os << "fit_lo = " << c.fit_lo << "\n";
  os << "fit_hi = " << c.fit_hi << "\n";
  os << "gap_guard = " << (c.gap_guard ? "on" : "off") << "\n";
  os << "contamination_tol = " << c.contamination_tol << "\n";
  os << "out = " << c.out << "\n";
  os << "label = " << c.label << "\n";
  os << "seed = " << c.seed << "\n";
  os << "threads = " << c.threads << "\n";
  os << "init_family = " << c.init_family << "\n";
  os << "init_amplitude = " << c.init_amplitude << "\n";
  os << "init_sigma = " << c.init_sigma << "\n";
  os << "init_bumps = " << c.init_bumps << "\n";
  os << "init_gamma = " << c.init_gamma << "\n";
  os << "init_jmax = " << c.init_jmax << "\n";
  os << "init_energy = " << c.init_energy << "\n";
  os << "lip_bound = " << c.lip_bound << "\n";
  for (const auto& [k, v] : notes) os << "# " << k << " = " << v << "\n";
  return os.str();
}

}  // namespace mslab
