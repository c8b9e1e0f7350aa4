#include "sda/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace sda {

namespace {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> pts;  // (n, value)
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Least-squares slope of log10(y) vs log10(x) over the last decade of x.
std::string slope_label(const Series& s) {
  if (s.pts.size() < 3) return "";
  const double x_hi = s.pts.back().first;
  const double x_lo = x_hi / 10.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (const auto& [x, y] : s.pts) {
    if (x < x_lo || y <= 0.0) continue;
    const double lx = std::log10(x), ly = std::log10(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  if (cnt < 3) return "";
  const double denom = cnt * sxx - sx * sx;
  if (denom == 0.0) return "";
  const double slope = (cnt * sxy - sx * sy) / denom;
  char buf[48];
  std::snprintf(buf, sizeof(buf), " (slope %.2f)", slope);
  return buf;
}

struct Panel {
  std::string title;
  std::vector<Series> series;
};

void render_panel(std::ofstream& out, const Panel& panel, double x0, double y0, double w,
                  double h) {
  // collect ranges over positive values
  double lx_min = 1e300, lx_max = -1e300, ly_min = 1e300, ly_max = -1e300;
  for (const Series& s : panel.series) {
    for (const auto& [x, y] : s.pts) {
      if (x <= 0.0 || y <= 0.0) continue;
      lx_min = std::min(lx_min, std::log10(x));
      lx_max = std::max(lx_max, std::log10(x));
      ly_min = std::min(ly_min, std::log10(y));
      ly_max = std::max(ly_max, std::log10(y));
    }
  }
  if (lx_min > lx_max) {
    lx_min = 0;
    lx_max = 1;
    ly_min = -1;
    ly_max = 0;
  }
  if (lx_max - lx_min < 1e-9) lx_max = lx_min + 1;
  if (ly_max - ly_min < 1e-9) ly_max = ly_min + 1;

  auto px = [&](double lx) { return x0 + (lx - lx_min) / (lx_max - lx_min) * w; };
  auto py = [&](double ly) { return y0 + h - (ly - ly_min) / (ly_max - ly_min) * h; };

  out << "<rect x='" << svg_num(x0) << "' y='" << svg_num(y0) << "' width='" << svg_num(w)
      << "' height='" << svg_num(h) << "' fill='none' stroke='#333'/>\n";
  out << "<text x='" << svg_num(x0 + w / 2) << "' y='" << svg_num(y0 - 12)
      << "' text-anchor='middle' font-size='15'>" << panel.title << "</text>\n";

  // decade grid lines and tick labels
  for (int e = static_cast<int>(std::ceil(lx_min)); e <= std::floor(lx_max); ++e) {
    const double x = px(e);
    out << "<line x1='" << svg_num(x) << "' y1='" << svg_num(y0) << "' x2='" << svg_num(x)
        << "' y2='" << svg_num(y0 + h) << "' stroke='#ddd'/>\n";
    out << "<text x='" << svg_num(x) << "' y='" << svg_num(y0 + h + 16)
        << "' text-anchor='middle' font-size='11'>1e" << e << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(ly_min)); e <= std::floor(ly_max); ++e) {
    const double y = py(e);
    out << "<line x1='" << svg_num(x0) << "' y1='" << svg_num(y) << "' x2='"
        << svg_num(x0 + w) << "' y2='" << svg_num(y) << "' stroke='#ddd'/>\n";
    out << "<text x='" << svg_num(x0 - 6) << "' y='" << svg_num(y + 4)
        << "' text-anchor='end' font-size='11'>1e" << e << "</text>\n";
  }

  std::size_t ci = 0;
  double legend_y = y0 + 16;
  for (const Series& s : panel.series) {
    const char* color = kPalette[ci % (sizeof(kPalette) / sizeof(kPalette[0]))];
    ++ci;
    std::string path;
    bool first = true;
    for (const auto& [x, y] : s.pts) {
      if (x <= 0.0 || y <= 0.0) continue;
      path += first ? "M" : "L";
      path += svg_num(px(std::log10(x)));
      path += " ";
      path += svg_num(py(std::log10(y)));
      first = false;
    }
    if (path.empty()) continue;
    out << "<path d='" << path << "' fill='none' stroke='" << color
        << "' stroke-width='1.6'/>\n";
    out << "<line x1='" << svg_num(x0 + 10) << "' y1='" << svg_num(legend_y) << "' x2='"
        << svg_num(x0 + 34) << "' y2='" << svg_num(legend_y) << "' stroke='" << color
        << "' stroke-width='2'/>\n";
    out << "<text x='" << svg_num(x0 + 40) << "' y='" << svg_num(legend_y + 4)
        << "' font-size='12'>" << s.label << slope_label(s) << "</text>\n";
    legend_y += 17;
  }
  out << "<text x='" << svg_num(x0 + w / 2) << "' y='" << svg_num(y0 + h + 34)
      << "' text-anchor='middle' font-size='12'>n</text>\n";
}

}  // namespace

void emit_plot(const ResultTable& table, const std::string& path) {
  if (table.rows.empty()) throw std::invalid_argument("emit_plot: empty table");

  // pick up to two metric panels; the standard pair when present
  std::vector<std::string> metrics;
  {
    std::set<std::string> seen;
    for (const ResultRow& r : table.rows) {
      if (r.metric == "time") continue;
      if (seen.insert(r.metric).second) metrics.push_back(r.metric);
    }
    const bool has_pair =
        std::count(metrics.begin(), metrics.end(), "psi_gap_avg") &&
        std::count(metrics.begin(), metrics.end(), "mahal_sq_avg");
    if (has_pair) metrics = {"psi_gap_avg", "mahal_sq_avg"};
    if (metrics.size() > 2) metrics.resize(2);
  }
  if (metrics.empty()) throw std::invalid_argument("emit_plot: no plottable series");

  std::vector<Panel> panels;
  for (const std::string& metric : metrics) {
    Panel panel;
    panel.title = metric == "psi_gap_avg"
                      ? "objective gap (averaged iterate)"
                      : (metric == "mahal_sq_avg" ? "squared Mahalanobis error (averaged)"
                                                  : metric);
    std::map<std::string, Series> by_label;
    std::vector<std::string> order;
    for (const ResultRow& r : table.rows) {
      if (r.metric != metric) continue;
      const std::string label = r.algorithm + " " + r.schedule;
      if (!by_label.count(label)) order.push_back(label);
      by_label[label].label = label;
      by_label[label].pts.emplace_back(static_cast<double>(r.n), r.mean);
    }
    for (const std::string& label : order) {
      Series s = by_label[label];
      // normalize so the first checkpoint sits at 1 (as the reference plots do)
      if (!s.pts.empty() && s.pts.front().second > 0.0) {
        const double base = s.pts.front().second;
        for (auto& [x, y] : s.pts) y /= base;
      }
      panel.series.push_back(std::move(s));
    }
    panels.push_back(std::move(panel));
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plot: cannot open " + path);
  const double panel_w = 500, panel_h = 400;
  const double width = panels.size() == 2 ? 1240 : 640;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
      << "' height='520' viewBox='0 0 " << width << " 520'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  render_panel(out, panels[0], 70, 50, panel_w, panel_h);
  if (panels.size() == 2) render_panel(out, panels[1], 690, 50, panel_w, panel_h);
  out << "</svg>\n";
  if (!out) throw std::runtime_error("emit_plot: write failure for " + path);
}

}  // namespace sda
