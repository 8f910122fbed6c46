#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Minimal hand-written SVG line/bar charts. Output bytes depend only on the
// inputs: coordinates are printed with fixed precision.
namespace eqlab::svg {

struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
  bool markers = false;
};

struct VerticalLine {
  double x = 0.0;
  std::string color = "#000000";
  bool dashed = true;
  std::string label;
};

struct Marker {
  double x = 0.0;
  double y = 0.0;
  std::string color = "#000000";
  std::string label;
};

struct Bar {
  double x0 = 0.0;
  double x1 = 0.0;
  double height = 0.0;
  std::string color;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  bool identity_diagonal = false;
  std::vector<Series> series;
  std::vector<VerticalLine> vertical_lines;
  std::vector<Marker> markers;
  std::vector<Bar> bars;
  // Category names placed under bar groups, as (x, text).
  std::vector<std::pair<double, std::string>> x_ticks_text;
};

// Panels are laid out left to right.
std::string render(const std::vector<Panel>& panels, std::string_view title,
                   double panel_width = 420.0, double panel_height = 320.0);

// Stable colour for the i-th group or series.
const std::string& palette(std::size_t i);

std::string escape(std::string_view text);

}  // namespace eqlab::svg
