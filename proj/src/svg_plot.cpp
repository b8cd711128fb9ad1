#include "mnlrl/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace mnlrl {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

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

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  const std::size_t n = spec.x.size();
  double x_min = n ? spec.x.front() : 0.0;
  double x_max = n ? spec.x.back() : 1.0;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (const auto& series : spec.series) {
    for (const auto& run : series.runs) {
      for (double y : run) {
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
      }
    }
  }
  if (!std::isfinite(y_min)) {
    y_min = 0.0;
    y_max = 1.0;
  }
  if (y_max - y_min < 1e-12) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  if (x_max - x_min < 1e-12) x_max = x_min + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h; };

  std::ostringstream svg;
  svg << R"(<?xml version="1.0" encoding="UTF-8"?>)" << "\n"
      << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << kWidth << R"(" height=")" << kHeight
      << R"(" viewBox="0 0 )" << kWidth << " " << kHeight << R"(">)" << "\n"
      << R"(<rect x="0" y="0" width=")" << kWidth << R"(" height=")" << kHeight
      << R"(" fill="white"/>)" << "\n"
      << R"(<text x=")" << num(kWidth / 2) << R"(" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">)"
      << escape(spec.title) << "</text>\n";

  // Axes and ticks.
  svg << R"(<g stroke="#333" stroke-width="1" fill="none">)"
      << R"(<line x1=")" << num(kLeft) << R"(" y1=")" << num(kTop + plot_h) << R"(" x2=")"
      << num(kLeft + plot_w) << R"(" y2=")" << num(kTop + plot_h) << R"("/>)"
      << R"(<line x1=")" << num(kLeft) << R"(" y1=")" << num(kTop) << R"(" x2=")" << num(kLeft)
      << R"(" y2=")" << num(kTop + plot_h) << R"("/>)"
      << "</g>\n";
  svg << R"(<g font-family="sans-serif" font-size="11" fill="#333">)" << "\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x_min + (x_max - x_min) * i / 4.0;
    const double fy = y_min + (y_max - y_min) * i / 4.0;
    svg << R"(<text x=")" << num(px(fx)) << R"(" y=")" << num(kTop + plot_h + 16)
        << R"(" text-anchor="middle">)" << tick(fx) << "</text>\n";
    svg << R"(<text x=")" << num(kLeft - 6) << R"(" y=")" << num(py(fy) + 4)
        << R"(" text-anchor="end">)" << tick(fy) << "</text>\n";
  }
  svg << R"(<text x=")" << num(kLeft + plot_w / 2) << R"(" y=")" << num(kHeight - 10)
      << R"(" text-anchor="middle">)" << escape(spec.x_label) << "</text>\n";
  svg << R"(<text x="16" y=")" << num(kTop + plot_h / 2)
      << R"svg(" text-anchor="middle" transform="rotate(-90 16 )svg" << num(kTop + plot_h / 2)
      << R"svg()">)svg" << escape(spec.y_label) << "</text>\n";
  svg << "</g>\n";

  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const auto& series = spec.series[si];
    const char* color = kPalette[si % (sizeof kPalette / sizeof kPalette[0])];
    std::vector<double> lo(n, std::numeric_limits<double>::infinity());
    std::vector<double> hi(n, -std::numeric_limits<double>::infinity());
    std::vector<double> mean(n, 0.0);
    std::vector<double> count(n, 0.0);
    for (const auto& run : series.runs) {
      for (std::size_t i = 0; i < std::min(n, run.size()); ++i) {
        lo[i] = std::min(lo[i], run[i]);
        hi[i] = std::max(hi[i], run[i]);
        mean[i] += run[i];
        count[i] += 1.0;
      }
    }
    std::size_t m = 0;
    while (m < n && count[m] > 0.0) {
      mean[m] /= count[m];
      ++m;
    }
    if (m == 0) continue;

    svg << R"(<polygon fill=")" << color << R"(" fill-opacity="0.18" stroke="none" points=")";
    for (std::size_t i = 0; i < m; ++i) svg << num(px(spec.x[i])) << "," << num(py(hi[i])) << " ";
    for (std::size_t i = m; i-- > 0;) svg << num(px(spec.x[i])) << "," << num(py(lo[i])) << " ";
    svg << R"("/>)" << "\n";

    svg << R"(<polyline fill="none" stroke=")" << color << R"(" stroke-width="1.5" points=")";
    for (std::size_t i = 0; i < m; ++i) {
      svg << (i ? " " : "") << num(px(spec.x[i])) << "," << num(py(mean[i]));
    }
    svg << R"("><title>)" << escape(series.name) << "</title></polyline>\n";

    const double ly = kTop + 14.0 + 16.0 * static_cast<double>(si);
    svg << R"(<text x=")" << num(kLeft + 12) << R"(" y=")" << num(ly)
        << R"(" font-family="sans-serif" font-size="12" fill=")" << color << R"(">)"
        << escape(series.name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace mnlrl
