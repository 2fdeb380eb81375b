#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mslab {

/// One evolution experiment, fully described.  Parsed from `key = value`
/// text; every field has a default so a minimal file (dim, L, n, t_end) is
/// complete.  The manifest written next to a run's outputs echoes every key
/// back in this same format, so a manifest is itself a loadable config.
struct RunConfig {
  int dim = 1;
  int n = 256;
  double L = 64.0;
  std::string scheme = "auto";  ///< auto | flat_dtn | elliptic
  double t_end = 10.0;
  double dt_init = 1e-4;
  double change_target = 1e-3;  ///< per-step relative-change target for dt control
  double energy_tol = 1e-8;     ///< relative energy-increase rejection threshold
  double depth_factor = 4.0;    ///< elliptic strip height Z = depth_factor * L
  int snapshots = 9;            ///< field snapshots, log-spaced over the run
  int rows_per_decade = 64;     ///< ledger sampling density in log t
  double fit_lo = 0.0;          ///< decay-fit window; 0,0 = none declared
  double fit_hi = 0.0;
  bool gap_guard = true;        ///< restrict fits to 2|k_min|^3 t_hi <= 0.04
  double contamination_tol = 0.01;  ///< outer-10% |h| budget relative to sup|h|
  std::string out;              ///< output directory; empty = no artifacts
  std::string label = "run";
  std::uint64_t seed = 1;
  int threads = 1;

  std::string init_family = "gaussian";  ///< gaussian | multibump | band_random | flat
  double init_amplitude = 0.1;
  double init_sigma = 2.0;
  int init_bumps = 3;
  double init_gamma = 2.0;
  int init_jmax = 8;
  double init_energy = 0.0;  ///< > 0: rescale initial data to this excess energy
  double lip_bound = 0.5;    ///< ingest gate on the initial slope sup

  bool operator==(const RunConfig&) const = default;

  /// "flat_dtn" or "elliptic" with the auto rule applied: the resolved solve
  /// is elliptic for one-dimensional interfaces below n = 1024.
  std::string resolved_scheme() const;

  /// 2 |k_min|^3 fit_hi: how far the slowest mode has decayed by the end of
  /// the fit window.  The guard rejects windows where this exceeds 0.04.
  double gap_guard_value() const;
};

/// Parse and validate `key = value` text ('#' starts a comment).  Unknown
/// keys, malformed values, and constraint violations throw config_error with
/// the offending key named.
RunConfig parse_config(const std::string& text);

/// parse_config over the contents of a file.
RunConfig load_config(const std::string& path);

/// Full key echo in parseable form, followed by `# key = value` comment
/// lines for the provenance notes (build stamp, abort markers, ...).
std::string manifest_text(const RunConfig& cfg,
                          const std::vector<std::pair<std::string, std::string>>& notes = {});

}  // namespace mslab
