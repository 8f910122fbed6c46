#include "figures.hpp"

#include <algorithm>
#include <cmath>

#include "eqlab/svg.hpp"

namespace eqlab::figures {
namespace {

std::size_t group_position(const GroupSet& groups, const std::string& label) {
  const auto id = groups.find(label);
  return id ? index(*id) : 0;
}

double nice_ceiling(double v) {
  if (!(v > 0.0)) return 1.0;
  const double step = std::pow(10.0, std::floor(std::log10(v))) / 2.0;
  return std::ceil(v / step) * step;
}

}  // namespace

std::string reliability(const std::vector<NamedCurves>& models, const GroupSet& groups,
                        const std::string& title) {
  double hi = 0.0;
  for (const auto& m : models) {
    for (const auto& c : m.curves) {
      for (const auto& p : c.points) hi = std::max({hi, p.mean_predicted, p.observed_rate});
    }
  }
  hi = std::min(1.0, nice_ceiling(hi * 1.05));
  std::vector<svg::Panel> panels;
  for (const auto& m : models) {
    svg::Panel panel;
    panel.title = m.name;
    panel.x_label = "predicted risk";
    panel.y_label = "observed rate";
    panel.x_max = panel.y_max = hi;
    panel.identity_diagonal = true;
    for (const auto& c : m.curves) {
      svg::Series s;
      s.name = c.group;
      s.color = svg::palette(group_position(groups, c.group));
      s.markers = true;
      for (const auto& p : c.points) s.points.emplace_back(p.mean_predicted, p.observed_rate);
      panel.series.push_back(std::move(s));
    }
    panels.push_back(std::move(panel));
  }
  return svg::render(panels, title);
}

std::string risk_distribution(std::span<const double> scores, std::span<const GroupId> ids,
                              const GroupSet& groups, const std::vector<Policy>& policies,
                              double t_star) {
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  double hi = sorted.empty() ? 1.0 : sorted[sorted.size() * 99 / 100];
  hi = std::max(hi, t_star * 2.0);
  hi = std::min(1.0, nice_ceiling(hi));

  constexpr std::size_t kBins = 60;
  const double width = hi / kBins;
  std::vector<std::vector<double>> density(groups.size(), std::vector<double>(kBins, 0.0));
  std::vector<double> counts(groups.size(), 0.0);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::size_t g = index(ids[i]);
    counts[g] += 1.0;
    if (scores[i] >= hi) continue;
    density[g][static_cast<std::size_t>(scores[i] / width)] += 1.0;
  }
  double y_hi = 0.0;
  std::vector<svg::Series> series;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (counts[g] == 0.0) continue;
    svg::Series s;
    s.name = groups.labels()[g];
    s.color = svg::palette(g);
    for (std::size_t b = 0; b < kBins; ++b) {
      const double d = density[g][b] / (counts[g] * width);
      y_hi = std::max(y_hi, d);
      s.points.emplace_back((static_cast<double>(b) + 0.5) * width, d);
    }
    series.push_back(std::move(s));
  }

  std::vector<svg::Panel> panels;
  for (const auto& policy : policies) {
    svg::Panel panel;
    panel.title = policy.label;
    panel.x_label = "risk score";
    panel.y_label = "density";
    panel.x_max = hi;
    panel.y_max = nice_ceiling(y_hi * 1.05);
    panel.series = series;
    panel.vertical_lines.push_back({t_star, "#000000", true, "t*"});
    for (const auto& [label, t] : policy.thresholds) {
      if (t > 1.0 || counts[group_position(groups, label)] == 0.0) continue;
      panel.vertical_lines.push_back(
          {t, svg::palette(group_position(groups, label)), false, ""});
    }
    panels.push_back(std::move(panel));
  }
  return svg::render(panels, "Risk distributions and screening thresholds");
}

std::string blinding(const BlindingReport& report) {
  svg::Panel panel;
  panel.title = "Decisions that change when group is dropped";
  panel.x_label = "group";
  panel.y_label = "% of group";
  panel.x_max = static_cast<double>(std::max<std::size_t>(1, report.groups.size()));
  double y_hi = 0.0;
  for (std::size_t k = 0; k < report.groups.size(); ++k) {
    const auto& g = report.groups[k];
    const double x = static_cast<double>(k);
    panel.bars.push_back({x + 0.15, x + 0.5, 100.0 * g.under_screened_frac, "#d95f02"});
    panel.bars.push_back({x + 0.5, x + 0.85, 100.0 * g.over_screened_frac, "#7570b3"});
    panel.x_ticks_text.emplace_back(x + 0.5, g.group);
    y_hi = std::max({y_hi, 100.0 * g.under_screened_frac, 100.0 * g.over_screened_frac});
  }
  panel.y_max = nice_ceiling(y_hi * 1.1);
  // Legend entries for the two bar colours.
  panel.series.push_back({"not screened, would benefit", "#d95f02", {}, false, false});
  panel.series.push_back({"screened, would not benefit", "#7570b3", {}, false, false});
  return svg::render({panel}, "Cost of a group-blind model", 560.0, 340.0);
}

std::string frontier(const std::vector<FrontierPoint>& points,
                     const AllocationResult& unconstrained) {
  svg::Panel panel;
  panel.title = "Appearances by voucher share";
  panel.x_label = "share of vouchers to focus group";
  panel.y_label = "additional appearances";
  double lo = unconstrained.objective, hi = unconstrained.objective;
  svg::Series s{"optimal at share", svg::palette(2), {}, false, true};
  for (const auto& p : points) {
    if (!p.ok()) continue;
    s.points.emplace_back(p.share, p.value());
    lo = std::min(lo, p.value());
    hi = std::max(hi, p.value());
  }
  panel.series.push_back(std::move(s));
  panel.markers.push_back({unconstrained.share, unconstrained.objective, "#d95f02", "unconstrained"});
  const double pad = std::max(1.0, 0.05 * (hi - lo));
  panel.y_min = std::max(0.0, std::floor(lo - pad));
  panel.y_max = std::ceil(hi + pad);
  return svg::render({panel}, "Voucher allocation frontier", 560.0, 360.0);
}

}  // namespace eqlab::figures
