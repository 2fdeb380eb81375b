#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "mslab/fit.hpp"
#include "mslab/functionals.hpp"

namespace mslab {

/// Render a ledger as a self-contained SVG: one log-log panel with the
/// excess area E, dissipation D, excess mass Vmass, and slope sup lip
/// against t, reference guide lines of slope -4/3 and -1, a legend, and a
/// summary table (final values, flagged-row count, and any supplied fits).
/// Rows with t <= 0 or nonpositive values are skipped per curve; `flagged`
/// may be empty or parallel to `rows`.  Throws config_error when there is
/// nothing to draw or the file cannot be written.
void write_report_svg(const std::string& path,
                      std::span<const FunctionalRecord> rows,
                      std::span<const std::uint8_t> flagged = {},
                      std::span<const FitResult> fits = {},
                      const std::string& title = "");

}  // namespace mslab
