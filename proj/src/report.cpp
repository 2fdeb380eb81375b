#include "mslab/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "mslab/errors.hpp"

namespace mslab {

namespace {

struct Curve {
  std::string name;
  std::string color;
  std::vector<double> t, y;
};

std::string num(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

/// "10^e" tick label
std::string decade_label(int e) { return "1e" + std::to_string(e); }

}  // namespace

void write_report_svg(const std::string& path,
                      std::span<const FunctionalRecord> rows,
                      std::span<const std::uint8_t> flagged,
                      std::span<const FitResult> fits,
                      const std::string& title) {
  std::vector<Curve> curves = {
      {"E", "#1f77b4", {}, {}},
      {"D", "#d62728", {}, {}},
      {"Vmass", "#2ca02c", {}, {}},
      {"lip", "#9467bd", {}, {}},
  };
  long n_flagged = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const FunctionalRecord& r = rows[i];
    if (i < flagged.size() && flagged[i]) ++n_flagged;
    if (!(r.t > 0.0)) continue;
    const double vals[4] = {r.E, r.D, r.Vmass, r.lip};
    for (int q = 0; q < 4; ++q) {
      if (vals[q] > 0.0 && std::isfinite(vals[q])) {
        curves[std::size_t(q)].t.push_back(r.t);
        curves[std::size_t(q)].y.push_back(vals[q]);
      }
    }
  }

  double t_lo = 0.0, t_hi = 0.0, y_hi = 0.0;
  bool any = false;
  for (const Curve& c : curves) {
    for (std::size_t i = 0; i < c.t.size(); ++i) {
      if (!any) {
        t_lo = t_hi = c.t[i];
        y_hi = c.y[i];
        any = true;
      } else {
        t_lo = std::min(t_lo, c.t[i]);
        t_hi = std::max(t_hi, c.t[i]);
        y_hi = std::max(y_hi, c.y[i]);
      }
    }
  }
  if (!any || t_hi <= t_lo)
    throw config_error("report: no positive samples spanning a time range in '" +
                       path + "'");
  // floor the value axis a dozen decades under the peak so roundoff tails
  // cannot flatten the visible curves
  const double y_floor = y_hi * 1e-12;
  double y_lo = y_hi;
  for (const Curve& c : curves)
    for (double v : c.y)
      if (v >= y_floor) y_lo = std::min(y_lo, v);

  const double lx0 = std::log10(t_lo), lx1 = std::log10(t_hi);
  const double ly0 = std::log10(y_lo) - 0.2, ly1 = std::log10(y_hi) + 0.2;

  const double ml = 70.0, mt = 46.0, pw = 640.0, ph = 420.0;
  const auto X = [&](double t) {
    return ml + (std::log10(t) - lx0) / (lx1 - lx0) * pw;
  };
  const auto Y = [&](double y) {
    const double ly = std::max(std::log10(y), ly0);
    return mt + ph - (ly - ly0) / (ly1 - ly0) * ph;
  };

  std::size_t table_lines = 3 + fits.size();
  const double legend_w = 150.0;
  const double width = ml + pw + legend_w + 20.0;
  const double height = mt + ph + 58.0 + 18.0 * double(table_lines);

  std::ostringstream svg;
  svg << std::setprecision(8);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"monospace\" font-size=\"12\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  if (!title.empty())
    svg << "<text x=\"" << ml << "\" y=\"20\" font-size=\"15\">" << title
        << "</text>\n";

  // frame and decade grid
  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = int(std::ceil(lx0)); e <= int(std::floor(lx1)); ++e) {
    const double x = ml + (e - lx0) / (lx1 - lx0) * pw;
    svg << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x
        << "\" y2=\"" << mt + ph << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << x - 12 << "\" y=\"" << mt + ph + 16 << "\">"
        << decade_label(e) << "</text>\n";
  }
  for (int e = int(std::ceil(ly0)); e <= int(std::floor(ly1)); ++e) {
    const double y = mt + ph - (e - ly0) / (ly1 - ly0) * ph;
    svg << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw
        << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << ml - 44 << "\" y=\"" << y + 4 << "\">"
        << decade_label(e) << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 - 8 << "\" y=\"" << mt + ph + 34
      << "\">t</text>\n";

  // reference slopes, anchored above the data's geometric center
  const double t_mid = std::sqrt(t_lo * t_hi);
  const double y_ref = y_hi * 2.0;
  for (const auto& [slope, label] :
       {std::pair{-4.0 / 3.0, std::string("t^-4/3")},
        std::pair{-1.0, std::string("t^-1")}}) {
    const auto y_of = [&](double t) {
      return y_ref * std::pow(t / t_mid, slope);
    };
    svg << "<line x1=\"" << X(t_lo) << "\" y1=\"" << Y(y_of(t_lo))
        << "\" x2=\"" << X(t_hi) << "\" y2=\"" << Y(y_of(t_hi))
        << "\" stroke=\"#888888\" stroke-dasharray=\"6 4\"/>\n";
    svg << "<text x=\"" << X(t_hi) - 52 << "\" y=\"" << Y(y_of(t_hi)) - 5
        << "\" fill=\"#555555\">" << label << "</text>\n";
  }

  // curves and legend
  double legend_y = mt + 10.0;
  for (const Curve& c : curves) {
    if (!c.t.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"" << c.color
          << "\" stroke-width=\"1.6\" points=\"";
      for (std::size_t i = 0; i < c.t.size(); ++i)
        svg << X(c.t[i]) << ',' << Y(c.y[i]) << ' ';
      svg << "\"/>\n";
    }
    const double lx = ml + pw + 14.0;
    svg << "<rect x=\"" << lx << "\" y=\"" << legend_y - 9 << "\" width=\"10\""
        << " height=\"10\" fill=\"" << c.color << "\"/>\n";
    svg << "<text x=\"" << lx + 16 << "\" y=\"" << legend_y << "\">" << c.name
        << (c.t.empty() ? " (empty)" : "") << "</text>\n";
    legend_y += 18.0;
  }

  // summary table
  double ty = mt + ph + 52.0;
  const FunctionalRecord& last = rows.back();
  svg << "<text x=\"" << ml << "\" y=\"" << ty << "\">rows " << rows.size()
      << ", flagged " << n_flagged << ", t in [" << num(rows.front().t) << ", "
      << num(last.t) << "]</text>\n";
  ty += 18.0;
  svg << "<text x=\"" << ml << "\" y=\"" << ty << "\">final  E " << num(last.E)
      << "  D " << num(last.D) << " (" << last.D_source << ")  Vmass "
      << num(last.Vmass) << "  lip " << num(last.lip) << "</text>\n";
  ty += 18.0;
  svg << "<text x=\"" << ml << "\" y=\"" << ty << "\">       h_inf "
      << num(last.h_inf) << "  dimless " << num(last.dimless) << "</text>\n";
  for (const FitResult& f : fits) {
    ty += 18.0;
    svg << "<text x=\"" << ml << "\" y=\"" << ty << "\">slope(" << f.quantity
        << ") = " << num(f.slope) << " +- " << num(f.slope_stderr, 2)
        << "  on [" << num(f.t_lo) << ", " << num(f.t_hi) << "], "
        << f.n_points << " pts</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream os(path);
  if (!os) throw config_error("cannot write '" + path + "'");
  os << svg.str();
  os.flush();
  if (!os) throw config_error("cannot write '" + path + "'");
}

}  // namespace mslab
