#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tikhoprox/core.hpp"

namespace tikhoprox {

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace detail

// Static log-log overlay, one polyline per series. Non-positive and
// non-finite samples cannot be placed on log axes and are skipped; a series
// whose points are all skipped still contributes its (empty) polyline so the
// document structure mirrors the input.
inline void write_loglog_svg(std::ostream& out, const std::string& title,
                             const std::string& xlabel,
                             const std::string& ylabel,
                             const std::vector<PlotSeries>& series) {
  const double W = 800, H = 600, ml = 70, mr = 160, mt = 46, mb = 54;
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};

  double xmin = kInf, xmax = -kInf, ymin = kInf, ymax = -kInf;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.x[i] > 0 && s.y[i] > 0 && std::isfinite(s.x[i]) &&
          std::isfinite(s.y[i])) {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
  if (!(xmin < xmax)) { xmin = 1e-1; xmax = 1e1; }
  if (!(ymin < ymax)) { ymin = 1e-1; ymax = 1e1; }
  double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
  double ly0 = std::log10(ymin), ly1 = std::log10(ymax);
  if (lx1 - lx0 < 1e-9) lx1 = lx0 + 1;
  if (ly1 - ly0 < 1e-9) ly1 = ly0 + 1;
  auto px = [&](double v) {
    return ml + (std::log10(v) - lx0) / (lx1 - lx0) * (W - ml - mr);
  };
  auto py = [&](double v) {
    return H - mb - (std::log10(v) - ly0) / (ly1 - ly0) * (H - mt - mb);
  };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
      << "\">\n"
      << "<rect width=\"" << W << "\" height=\"" << H
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << detail::xml_escape(title) << "</text>\n";

  // Decade grid lines with labels.
  for (int e = int(std::ceil(lx0)); e <= int(std::floor(lx1)); ++e) {
    double X = px(std::pow(10.0, e));
    out << "<line x1=\"" << X << "\" y1=\"" << mt << "\" x2=\"" << X
        << "\" y2=\"" << H - mb << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << X << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">1e"
        << e << "</text>\n";
  }
  for (int e = int(std::ceil(ly0)); e <= int(std::floor(ly1)); ++e) {
    double Y = py(std::pow(10.0, e));
    out << "<line x1=\"" << ml << "\" y1=\"" << Y << "\" x2=\"" << W - mr
        << "\" y2=\"" << Y << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << ml - 6 << "\" y=\"" << Y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">1e"
        << e << "</text>\n";
  }
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
      << "\" height=\"" << H - mt - mb
      << "\" fill=\"none\" stroke=\"#333333\"/>\n"
      << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << detail::xml_escape(xlabel) << "</text>\n"
      << "<text x=\"18\" y=\"" << (mt + H - mb) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 "
      << (mt + H - mb) / 2 << ")\">" << detail::xml_escape(ylabel)
      << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.x[i] > 0 && s.y[i] > 0 && std::isfinite(s.x[i]) &&
          std::isfinite(s.y[i]))
        out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    out << "\"/>\n";
    double ly = mt + 18 + 18 * double(si);
    out << "<line x1=\"" << W - mr + 12 << "\" y1=\"" << ly - 4 << "\" x2=\""
        << W - mr + 34 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << W - mr + 40 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << detail::xml_escape(s.name) << "</text>\n";
  }
  out << "</svg>\n";
}

inline void write_loglog_svg(const std::string& path, const std::string& title,
                             const std::string& xlabel,
                             const std::string& ylabel,
                             const std::vector<PlotSeries>& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_loglog_svg(out, title, xlabel, ylabel, series);
}

}  // namespace tikhoprox
