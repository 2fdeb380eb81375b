#include "mslab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "mslab/errors.hpp"

namespace mslab {

FitResult fit_decay(std::span<const double> t, std::span<const double> y,
                    const std::string& quantity, double t_lo, double t_hi) {
  if (t.size() != y.size())
    throw config_error("fit_decay: series length mismatch (" +
                       std::to_string(t.size()) + " times, " +
                       std::to_string(y.size()) + " values)");
  if (!(t_lo > 0.0) || !(t_hi > t_lo))
    throw config_error("fit_decay: window must satisfy 0 < t_lo < t_hi");

  std::vector<double> lt, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(y[i] > 0.0)) {
      std::ostringstream msg;
      msg << "fit_decay(" << quantity << "): non-positive value " << y[i]
          << " at t = " << t[i] << " inside the fit window";
      throw numerical_error(msg.str());
    }
    lt.push_back(std::log(t[i]));
    ly.push_back(std::log(y[i]));
  }

  if (lt.size() < 8) {
    double avail_lo = 0.0, avail_hi = 0.0;
    if (!t.empty()) {
      auto [mn, mx] = std::minmax_element(t.begin(), t.end());
      avail_lo = *mn;
      avail_hi = *mx;
    }
    std::ostringstream msg;
    msg << "fit_decay(" << quantity << "): only " << lt.size()
        << " samples in window [" << t_lo << ", " << t_hi
        << "], need >= 8; series covers t in [" << avail_lo << ", " << avail_hi
        << "]";
    throw numerical_error(msg.str());
  }

  const std::size_t n = lt.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lt[i];
    my += ly[i];
  }
  mx /= double(n);
  my /= double(n);

  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lt[i] - mx) * (lt[i] - mx);
    sxy += (lt[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0))
    throw numerical_error("fit_decay(" + quantity +
                          "): window collapses to a single abscissa");

  FitResult r;
  r.quantity = quantity;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;

  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ly[i] - (r.intercept + r.slope * lt[i]);
    ss_res += e * e;
  }
  r.slope_stderr = n > 2 ? std::sqrt(ss_res / (double(n) - 2.0) / sxx) : 0.0;
  r.n_points = int(n);

  double wlo = t_hi, whi = t_lo;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    wlo = std::min(wlo, t[i]);
    whi = std::max(whi, t[i]);
  }
  r.t_lo = wlo;
  r.t_hi = whi;
  return r;
}

}  // namespace mslab
