#include "logeuc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace logeuc {

namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 70.0;
constexpr double kRight = kWidth - 180.0;  // room for the legend
constexpr double kTop = 40.0;
constexpr double kBottom = kHeight - 60.0;

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

// Tick step rounded to 1/2/5 times a power of ten.
double nice_step(double span, int target_ticks) {
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double step = 10.0;
  if (norm < 1.5)
    step = 1.0;
  else if (norm < 3.0)
    step = 2.0;
  else if (norm < 7.0)
    step = 5.0;
  return step * mag;
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<SvgSeries>& series,
                              bool log_x) {
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  bool have_point = false;
  std::set<double> x_values;
  for (const SvgSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      const double xv = log_x ? std::log10(x) : x;
      if (!have_point) {
        x_lo = x_hi = xv;
        y_lo = y_hi = y;
        have_point = true;
      } else {
        x_lo = std::min(x_lo, xv);
        x_hi = std::max(x_hi, xv);
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
      }
      x_values.insert(x);
    }
  }
  if (x_hi - x_lo < 1e-12) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi - y_lo < 1e-12) {
    y_lo -= 0.05;
    y_hi += 0.05;
  }
  const double y_pad = 0.06 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;
  const double x_pad = log_x ? 0.04 * (x_hi - x_lo) : 0.03 * (x_hi - x_lo);
  x_lo -= x_pad;
  x_hi += x_pad;

  const auto sx = [&](double x) {
    const double xv = log_x ? std::log10(x) : x;
    return kLeft + (xv - x_lo) / (x_hi - x_lo) * (kRight - kLeft);
  };
  const auto sy = [&](double y) { return kBottom - (y - y_lo) / (y_hi - y_lo) * (kBottom - kTop); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"860\" height=\"520\" "
         "viewBox=\"0 0 860 520\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"860\" height=\"520\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << coord((kLeft + kRight) / 2) << "\" y=\"24\" text-anchor=\"middle\" "
         "font-size=\"16\">"
      << escape(title) << "</text>\n";

  // y grid and ticks
  const double y_step = nice_step(y_hi - y_lo, 5);
  for (double t = std::ceil(y_lo / y_step) * y_step; t <= y_hi + 1e-9 * y_step; t += y_step) {
    const double py = sy(t);
    out << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(py) << "\" x2=\"" << coord(kRight)
        << "\" y2=\"" << coord(py) << "\" stroke=\"#e6e6e6\"/>\n";
    out << "<text x=\"" << coord(kLeft - 8) << "\" y=\"" << coord(py + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(t) << "</text>\n";
  }

  // x ticks: data values under log scale, nice steps otherwise
  std::vector<double> x_ticks;
  if (log_x) {
    x_ticks.assign(x_values.begin(), x_values.end());
    while (x_ticks.size() > 12) {
      std::vector<double> thinned;
      for (std::size_t i = 0; i < x_ticks.size(); i += 2) thinned.push_back(x_ticks[i]);
      x_ticks = std::move(thinned);
    }
  } else {
    const double x_step = nice_step(x_hi - x_lo, 6);
    for (double t = std::ceil(x_lo / x_step) * x_step; t <= x_hi + 1e-9 * x_step; t += x_step) {
      x_ticks.push_back(t);
    }
  }
  for (double t : x_ticks) {
    const double px = sx(t);
    out << "<line x1=\"" << coord(px) << "\" y1=\"" << coord(kBottom) << "\" x2=\"" << coord(px)
        << "\" y2=\"" << coord(kBottom + 5) << "\" stroke=\"#444444\"/>\n";
    out << "<text x=\"" << coord(px) << "\" y=\"" << coord(kBottom + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(t) << "</text>\n";
  }

  // frame and axis labels
  out << "<rect x=\"" << coord(kLeft) << "\" y=\"" << coord(kTop) << "\" width=\""
      << coord(kRight - kLeft) << "\" height=\"" << coord(kBottom - kTop)
      << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  out << "<text x=\"" << coord((kLeft + kRight) / 2) << "\" y=\"" << coord(kHeight - 16)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(x_label) << "</text>\n";
  out << "<text x=\"20\" y=\"" << coord((kTop + kBottom) / 2)
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 20 "
      << coord((kTop + kBottom) / 2) << ")\">" << escape(y_label) << "</text>\n";

  // series
  for (const SvgSeries& s : series) {
    if (s.points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\"";
    if (s.dashed) out << " stroke-dasharray=\"7,5\"";
    out << " points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (i) out << " ";
      out << coord(sx(s.points[i].first)) << "," << coord(sy(s.points[i].second));
    }
    out << "\"/>\n";
    if (!s.dashed) {
      for (const auto& [x, y] : s.points) {
        out << "<circle cx=\"" << coord(sx(x)) << "\" cy=\"" << coord(sy(y))
            << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      }
    }
  }

  // legend
  double ly = kTop + 14;
  for (const SvgSeries& s : series) {
    const double lx = kRight + 14;
    out << "<line x1=\"" << coord(lx) << "\" y1=\"" << coord(ly - 4) << "\" x2=\""
        << coord(lx + 26) << "\" y2=\"" << coord(ly - 4) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"1.8\"";
    if (s.dashed) out << " stroke-dasharray=\"7,5\"";
    out << "/>\n";
    out << "<text x=\"" << coord(lx + 32) << "\" y=\"" << coord(ly)
        << "\" font-size=\"12\">" << escape(s.name) << "</text>\n";
    ly += 22;
  }

  out << "</svg>\n";
  return out.str();
}

}  // namespace logeuc
