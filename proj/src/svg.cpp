#include "eqlab/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace eqlab::svg {
namespace {

constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;
constexpr double kTitleHeight = 30.0;
constexpr int kTicks = 5;

std::string num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

std::string tick_label(double v) {
  char buffer[32];
  const double magnitude = std::abs(v);
  if (magnitude != 0.0 && (magnitude < 0.01 || magnitude >= 10000.0)) {
    std::snprintf(buffer, sizeof(buffer), "%.2g", v);
  } else if (magnitude >= 100.0) {
    std::snprintf(buffer, sizeof(buffer), "%.0f", v);
  } else {
    std::snprintf(buffer, sizeof(buffer), "%.3g", v);
  }
  return buffer;
}

struct Frame {
  double left, top, width, height;
  const Panel* panel;

  double px(double x) const {
    const double span = panel->x_max - panel->x_min;
    const double t = span > 0.0 ? (x - panel->x_min) / span : 0.5;
    return left + std::clamp(t, 0.0, 1.0) * width;
  }
  double py(double y) const {
    const double span = panel->y_max - panel->y_min;
    const double t = span > 0.0 ? (y - panel->y_min) / span : 0.5;
    return top + height - std::clamp(t, 0.0, 1.0) * height;
  }
};

void render_panel(std::ostringstream& out, const Panel& panel, double x0, double y0,
                  double w, double h) {
  const Frame f{x0 + kMarginLeft, y0 + kMarginTop, w - kMarginLeft - kMarginRight,
                h - kMarginTop - kMarginBottom, &panel};

  out << "<g>\n";
  out << "<text x=\"" << num(f.left + f.width / 2) << "\" y=\"" << num(y0 + 22)
      << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(panel.title) << "</text>\n";
  out << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\""
      << num(f.width) << "\" height=\"" << num(f.height)
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";

  for (int t = 0; t <= kTicks; ++t) {
    const double xv = panel.x_min + (panel.x_max - panel.x_min) * t / kTicks;
    const double yv = panel.y_min + (panel.y_max - panel.y_min) * t / kTicks;
    out << "<line x1=\"" << num(f.px(xv)) << "\" y1=\"" << num(f.top + f.height)
        << "\" x2=\"" << num(f.px(xv)) << "\" y2=\"" << num(f.top + f.height + 4)
        << "\" stroke=\"#444444\"/>\n";
    if (panel.x_ticks_text.empty()) {
      out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(f.top + f.height + 16)
          << "\" text-anchor=\"middle\" font-size=\"10\">" << tick_label(xv) << "</text>\n";
    }
    out << "<line x1=\"" << num(f.left - 4) << "\" y1=\"" << num(f.py(yv)) << "\" x2=\""
        << num(f.left) << "\" y2=\"" << num(f.py(yv)) << "\" stroke=\"#444444\"/>\n";
    out << "<text x=\"" << num(f.left - 6) << "\" y=\"" << num(f.py(yv) + 3)
        << "\" text-anchor=\"end\" font-size=\"10\">" << tick_label(yv) << "</text>\n";
  }
  for (const auto& [x, text] : panel.x_ticks_text) {
    out << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(f.top + f.height + 16)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(text) << "</text>\n";
  }
  out << "<text x=\"" << num(f.left + f.width / 2) << "\" y=\"" << num(f.top + f.height + 34)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(panel.x_label) << "</text>\n";
  const double ylx = x0 + 14;
  const double yly = f.top + f.height / 2;
  out << "<text x=\"" << num(ylx) << "\" y=\"" << num(yly)
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " << num(ylx) << ' '
      << num(yly) << ")\">" << escape(panel.y_label) << "</text>\n";

  if (panel.identity_diagonal) {
    const double lo = std::max(panel.x_min, panel.y_min);
    const double hi = std::min(panel.x_max, panel.y_max);
    out << "<line x1=\"" << num(f.px(lo)) << "\" y1=\"" << num(f.py(lo)) << "\" x2=\""
        << num(f.px(hi)) << "\" y2=\"" << num(f.py(hi))
        << "\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (const auto& bar : panel.bars) {
    const double top = f.py(bar.height);
    const double base = f.py(std::max(panel.y_min, 0.0));
    out << "<rect x=\"" << num(f.px(bar.x0)) << "\" y=\"" << num(std::min(top, base))
        << "\" width=\"" << num(f.px(bar.x1) - f.px(bar.x0)) << "\" height=\""
        << num(std::abs(base - top)) << "\" fill=\"" << bar.color << "\"/>\n";
  }
  for (const auto& line : panel.vertical_lines) {
    out << "<line x1=\"" << num(f.px(line.x)) << "\" y1=\"" << num(f.top) << "\" x2=\""
        << num(f.px(line.x)) << "\" y2=\"" << num(f.top + f.height) << "\" stroke=\""
        << line.color << "\" stroke-width=\"1.5\""
        << (line.dashed ? " stroke-dasharray=\"5 3\"" : "") << "/>\n";
    if (!line.label.empty()) {
      out << "<text x=\"" << num(f.px(line.x) + 3) << "\" y=\"" << num(f.top + 12)
          << "\" font-size=\"10\" fill=\"" << line.color << "\">" << escape(line.label)
          << "</text>\n";
    }
  }
  for (const auto& s : panel.series) {
    if (s.points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.8\""
        << (s.dashed ? " stroke-dasharray=\"6 3\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      out << (i ? " " : "") << num(f.px(s.points[i].first)) << ','
          << num(f.py(s.points[i].second));
    }
    out << "\"/>\n";
    if (s.markers) {
      for (const auto& [x, y] : s.points) {
        out << "<circle cx=\"" << num(f.px(x)) << "\" cy=\"" << num(f.py(y))
            << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
      }
    }
  }
  for (const auto& m : panel.markers) {
    out << "<circle cx=\"" << num(f.px(m.x)) << "\" cy=\"" << num(f.py(m.y))
        << "\" r=\"5\" fill=\"none\" stroke=\"" << m.color << "\" stroke-width=\"2\"/>\n";
    if (!m.label.empty()) {
      out << "<text x=\"" << num(f.px(m.x) + 7) << "\" y=\"" << num(f.py(m.y) - 7)
          << "\" font-size=\"10\">" << escape(m.label) << "</text>\n";
    }
  }

  // Legend, top-left inside the frame.
  double ly = f.top + 14;
  for (const auto& s : panel.series) {
    if (s.name.empty()) continue;
    out << "<line x1=\"" << num(f.left + 8) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
        << num(f.left + 26) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"6 3\"" : "") << "/>\n";
    out << "<text x=\"" << num(f.left + 30) << "\" y=\"" << num(ly)
        << "\" font-size=\"10\">" << escape(s.name) << "</text>\n";
    ly += 14;
  }
  out << "</g>\n";
}

}  // namespace

std::string escape(std::string_view text) {
  std::string out;
  for (const char c : text) {
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

const std::string& palette(std::size_t i) {
  static const std::array<std::string, 8> colors = {
      "#1b9e77", "#d95f02", "#7570b3", "#e7298a",
      "#66a61e", "#e6ab02", "#a6761d", "#666666"};
  return colors[i % colors.size()];
}

std::string render(const std::vector<Panel>& panels, std::string_view title,
                   double panel_width, double panel_height) {
  const double width = panel_width * static_cast<double>(std::max<std::size_t>(1, panels.size()));
  const double height = panel_height + kTitleHeight;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height)
      << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << num(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"16\">"
      << escape(title) << "</text>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    render_panel(out, panels[p], panel_width * static_cast<double>(p), kTitleHeight,
                 panel_width, panel_height);
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace eqlab::svg
