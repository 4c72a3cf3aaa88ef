#include "lrlf/plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace lrlf {

namespace {

constexpr double kPanelW = 420, kPanelH = 260, kMarginL = 60, kMarginR = 15, kMarginT = 30, kMarginB = 40, kHeader = 30;
const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

std::string tick(double v) {
  std::ostringstream s;
  s << std::setprecision(3) << v;
  return s.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) lo = 0, hi = 1;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  }
};

void panel(std::ostream& out, const PlotPanel& p, double ox, double oy) {
  Range xr, yr;
  for (const auto& s : p.series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
    for (double v : s.lower) yr.add(v);
    for (double v : s.upper) yr.add(v);
  }
  xr.finish();
  yr.finish();
  const double w = kPanelW - kMarginL - kMarginR, h = kPanelH - kMarginT - kMarginB;
  const double x0 = ox + kMarginL, y0 = oy + kMarginT;
  auto px = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * w; };
  auto py = [&](double v) { return y0 + h - (std::clamp(v, yr.lo, yr.hi) - yr.lo) / (yr.hi - yr.lo) * h; };

  out << "<g>\n<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  out << "<text x=\"" << num(x0 + w / 2) << "\" y=\"" << num(oy + 18) << "\" text-anchor=\"middle\" font-size=\"13\">"
      << escape(p.title) << "</text>\n";
  out << "<text x=\"" << num(x0 + w / 2) << "\" y=\"" << num(y0 + h + 32) << "\" text-anchor=\"middle\" font-size=\"11\">"
      << escape(p.x_label) << "</text>\n";
  out << "<text transform=\"translate(" << num(ox + 14) << ',' << num(y0 + h / 2) << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"11\">"
      << escape(p.y_label) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / 4.0, yv = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    out << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(y0 + h + 14) << "\" text-anchor=\"middle\" font-size=\"9\">" << tick(xv)
        << "</text>\n";
    out << "<text x=\"" << num(x0 - 4) << "\" y=\"" << num(py(yv) + 3) << "\" text-anchor=\"end\" font-size=\"9\">" << tick(yv)
        << "</text>\n";
  }
  for (std::size_t si = 0; si < p.series.size(); ++si) {
    const auto& s = p.series[si];
    const char* colour = kColours[si % std::size(kColours)];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.lower.size() >= n && s.upper.size() >= n && n > 0) {
      out << "<polygon fill=\"" << colour << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
      for (std::size_t i = 0; i < n; ++i) out << num(px(s.x[i])) << ',' << num(py(s.upper[i])) << ' ';
      for (std::size_t i = n; i-- > 0;) out << num(px(s.x[i])) << ',' << num(py(s.lower[i])) << ' ';
      out << "\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < n; ++i)
      if (std::isfinite(s.y[i])) out << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    out << "\"/>\n";
    const double ly = y0 + 12 + 13.0 * static_cast<double>(si);
    out << "<line x1=\"" << num(x0 + w - 80) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(x0 + w - 64) << "\" y2=\"" << num(ly - 4)
        << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(x0 + w - 60) << "\" y=\"" << num(ly) << "\" font-size=\"10\">" << escape(s.label) << "</text>\n";
  }
  out << "</g>\n";
}

}  // namespace

void write_svg(std::ostream& out, const std::string& title, const std::vector<PlotPanel>& panels, int columns) {
  columns = std::max(1, columns);
  const int rows = static_cast<int>((panels.size() + static_cast<std::size_t>(columns) - 1) / static_cast<std::size_t>(columns));
  const double width = kPanelW * columns, height = kHeader + kPanelH * std::max(1, rows);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" << escape(title) << "</text>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const double ox = kPanelW * static_cast<double>(i % static_cast<std::size_t>(columns));
    const double oy = kHeader + kPanelH * static_cast<double>(i / static_cast<std::size_t>(columns));
    panel(out, panels[i], ox, oy);
  }
  out << "</svg>\n";
}

}  // namespace lrlf
