#include "sfwm/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "sfwm/csv.hpp"
#include "sfwm/error.hpp"

namespace sfwm::io {
namespace {

constexpr std::array<const char*, 8> kColors = {"#1b9e77", "#17becf", "#1f3fb4", "#c51b8a",
                                                "#d62728", "#7f7f7f", "#ff7f0e", "#2ca02c"};

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
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string render_figure(const std::vector<Series>& series, const FigureStyle& style) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  size_t points = 0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw InvalidArgument("render_figure: series " + s.label + " has mismatched x/y");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (style.log_y && !(s.y[i] > 0)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
      ++points;
    }
  }
  if (points == 0) throw InvalidArgument("render_figure: no data to plot");
  if (x1 == x0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  double ylo, yhi;
  if (style.log_y) {
    ylo = std::pow(10.0, std::floor(std::log10(y0)));
    yhi = std::pow(10.0, std::ceil(std::log10(y1)));
    if (yhi <= ylo) yhi = ylo * 10.0;
  } else {
    ylo = std::min(0.0, y0);
    yhi = y1 > ylo ? y1 + 0.05 * (y1 - ylo) : ylo + 1.0;
  }

  const double W = style.width, H = style.height;
  const double ml = 70, mr = 150, mt = 36, mb = 50;
  const double pw = W - ml - mr, ph = H - mt - mb;
  const auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) {
    const double f = style.log_y ? (std::log10(y) - std::log10(ylo)) / (std::log10(yhi) - std::log10(ylo))
                                 : (y - ylo) / (yhi - ylo);
    return mt + (1.0 - f) * ph;
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << style.height
    << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\" data-y-min=\"" << format_double(ylo)
    << "\" data-y-max=\"" << format_double(yhi) << "\" data-log-y=\"" << (style.log_y ? 1 : 0) << "\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << style.height << "\" fill=\"white\"/>\n";
  if (!style.title.empty())
    o << "<text x=\"" << num(ml + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(style.title) << "</text>\n";
  o << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
    << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\"/>\n</g>\n";

  o << "<g class=\"ticks\" font-size=\"11\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double x = x0 + (x1 - x0) * i / 5.0;
    o << "<text x=\"" << num(px(x)) << "\" y=\"" << num(mt + ph + 16) << "\" text-anchor=\"middle\">" << num(x)
      << "</text>\n";
  }
  if (style.log_y) {
    for (double y = ylo; y <= yhi * 1.0001; y *= 10.0)
      o << "<text x=\"" << num(ml - 6) << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << num(y)
        << "</text>\n";
  } else {
    for (int i = 0; i <= 5; ++i) {
      const double y = ylo + (yhi - ylo) * i / 5.0;
      o << "<text x=\"" << num(ml - 6) << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << num(y)
        << "</text>\n";
    }
  }
  o << "</g>\n";
  o << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(H - 10) << "\" text-anchor=\"middle\" font-size=\"13\">"
    << escape(style.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << num(mt + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\" "
    << "font-size=\"13\">" << escape(style.y_label) << "</text>\n";

  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::ostringstream pts;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (style.log_y && !(s.y[i] > 0))) continue;
      pts << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    o << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << kColors[k % kColors.size()] << "\" points=\""
      << pts.str() << "\"/>\n";
  }
  o << "<g class=\"legend\" font-size=\"12\">\n";
  int row = 0;
  for (size_t k = 0; k < series.size(); ++k) {
    if (series[k].label.empty()) continue;
    const double ly = mt + 12 + 18 * row++;
    o << "<line x1=\"" << num(W - mr + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(W - mr + 32)
      << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << kColors[k % kColors.size()] << "\" stroke-width=\"2\"/>\n";
    o << "<text class=\"legend-label\" x=\"" << num(W - mr + 38) << "\" y=\"" << num(ly) << "\">"
      << escape(series[k].label) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

}  // namespace sfwm::io
