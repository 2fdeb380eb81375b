#pragma once

#include <span>
#include <string>

namespace mslab {

/// Least-squares power-law fit of a positive time series.
struct FitResult {
  std::string quantity;
  double slope = 0.0;         ///< d log(y) / d log(t)
  double intercept = 0.0;     ///< log(y) at log(t) = 0
  double slope_stderr = 0.0;  ///< standard error of the slope estimate
  double t_lo = 0.0;          ///< window actually used
  double t_hi = 0.0;
  int n_points = 0;           ///< admitted samples, always >= 8
};

/// Fit log(y) vs log(t) over the samples with t in [t_lo, t_hi].
/// Requires at least 8 samples in the window and strictly positive values
/// there; violations raise numerical_error naming the quantity and, when the
/// window is too thin, the available t-range of the series.
FitResult fit_decay(std::span<const double> t, std::span<const double> y,
                    const std::string& quantity, double t_lo, double t_hi);

}  // namespace mslab
