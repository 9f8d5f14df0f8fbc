#include "dcm/plots.hpp"

#include "dcm/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace dcm {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string svg_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series) {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (const auto& s : series) {
    for (Index i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x(i)) || !std::isfinite(s.y(i))) continue;
      x0 = std::min(x0, s.x(i));
      x1 = std::max(x1, s.x(i));
      y0 = std::min(y0, s.y(i));
      y1 = std::max(y1, s.y(i));
    }
  }
  if (!std::isfinite(x0)) {
    x0 = 0.0;
    x1 = 1.0;
    y0 = 0.0;
    y1 = 1.0;
  }
  if (x1 - x0 <= 0.0) {
    x0 -= 0.5 * std::max(1.0, std::abs(x0));
    x1 += 0.5 * std::max(1.0, std::abs(x1));
  }
  if (y1 - y0 <= 0.0) {
    y0 -= 0.5 * std::max(1.0, std::abs(y0));
    y1 += 0.5 * std::max(1.0, std::abs(y1));
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" width=\"" << kWidth
    << "\" height=\"" << kHeight << "\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << escape(title) << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    o << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px(xv)) << "\" y2=\""
      << num(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + ph + 18)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(xv) << "</text>\n";
    o << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << num(kLeft) << "\" y2=\""
      << num(py(yv)) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(yv) + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick_label(yv) << "</text>\n";
  }
  o << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << num(kTop + ph / 2) << "\" transform=\"rotate(-90 16 " << num(kTop + ph / 2)
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % (sizeof(kColors) / sizeof(kColors[0]))];
    o << "<g class=\"series\" data-label=\"" << escape(s.label) << "\">\n";
    if (s.x.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (Index i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x(i)) || !std::isfinite(s.y(i))) continue;
        o << num(px(s.x(i))) << ',' << num(py(s.y(i))) << ' ';
      }
      o << "\"/>\n";
    }
    if (s.markers || s.x.size() == 1) {
      for (Index i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x(i)) || !std::isfinite(s.y(i))) continue;
        o << "<circle cx=\"" << num(px(s.x(i))) << "\" cy=\"" << num(py(s.y(i))) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
    o << "</g>\n";
    const double ly = kTop + 14 + 16.0 * static_cast<double>(k);
    o << "<line x1=\"" << num(kLeft + pw - 150) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(kLeft + pw - 130)
      << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text class=\"legend\" x=\"" << num(kLeft + pw - 125) << "\" y=\"" << num(ly + 4)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::string& path, const std::string& svg) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  out << svg;
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path);
}

}  // namespace dcm
