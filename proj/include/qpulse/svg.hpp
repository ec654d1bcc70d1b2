#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace qpulse {

struct SvgSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Self-contained single-file line chart; no external assets or scripts.
inline std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label, const std::vector<SvgSeries>& series) {
  const double width = 840, height = 520;
  const double left = 80, right = 820, top = 50, bottom = 460;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const SvgSeries& s : series) {
    for (auto [x, y] : s.points) {
      if (first) {
        xmin = xmax = x;
        ymin = ymax = y;
        first = false;
      }
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (right - left); };
  auto py = [&](double y) { return bottom - (y - ymin) / (ymax - ymin) * (bottom - top); };
  auto num = [](double v) {
    char b[32];
    std::snprintf(b, sizeof(b), "%.6g", v);
    return std::string(b);
  };

  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\">\n",
                width, height, width, height);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%g\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">%s</text>\n",
                (left + right) / 2, title.c_str());
  out += buf;

  // axes with 6 ticks each
  for (int i = 0; i <= 5; ++i) {
    double fx = xmin + (xmax - xmin) * i / 5.0;
    double fy = ymin + (ymax - ymin) * i / 5.0;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#dddddd\"/>\n", px(fx), top,
                  px(fx), bottom);
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"#dddddd\"/>\n", left, py(fy),
                  right, py(fy));
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\" font-size=\"12\">%s</text>\n", px(fx),
                  bottom + 20, num(fx).c_str());
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%g\" y=\"%g\" text-anchor=\"end\" font-size=\"12\">%s</text>\n", left - 8,
                  py(fy) + 4, num(fy).c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n"
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                left, bottom, right, bottom, left, top, left, bottom);
  out += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\" font-size=\"14\">%s</text>\n",
                (left + right) / 2, height - 12, x_label.c_str());
  out += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"20\" y=\"%g\" text-anchor=\"middle\" font-size=\"14\" "
                "transform=\"rotate(-90 20 %g)\">%s</text>\n",
                (top + bottom) / 2, (top + bottom) / 2, y_label.c_str());
  out += buf;

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % 6];
    out += "<polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : series[s].points) {
      std::snprintf(buf, sizeof(buf), "%g,%g ", px(x), py(y));
      out += buf;
    }
    out += "\"/>\n";
    // legend entry
    double ly = top + 18.0 * static_cast<double>(s);
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" stroke-width=\"3\"/>"
                  "<text x=\"%g\" y=\"%g\" font-size=\"12\">%s</text>\n",
                  right - 190.0, ly, right - 160.0, ly, color, right - 152.0, ly + 4,
                  series[s].name.c_str());
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace qpulse
