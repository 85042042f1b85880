#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dgame/ensemble.hpp"
#include "dgame/glmodel.hpp"
#include "dgame/io/config_file.hpp"
#include "dgame/io/format.hpp"

namespace dgame::io {

namespace detail {

inline std::string num(double v, int precision = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string svg_open(int width, int height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
         std::to_string(width) + " " + std::to_string(height) + "\">\n";
}

inline std::string text(double x, double y, std::string_view body, std::string_view anchor = "middle",
                        int size = 12) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
         std::to_string(size) + "\" text-anchor=\"" + std::string(anchor) + "\">" + xml_escape(body) + "</text>\n";
}

inline std::string hex_color(int r, int g, int b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace detail

/// White to blue by f_spec or white to red by f_fund; the larger fraction
/// picks the hue (blue on ties). Both zero gives white.
inline std::string cell_color(double f_spec, double f_fund) {
  const bool blue = f_spec >= f_fund;
  const double f = std::clamp(blue ? f_spec : f_fund, 0.0, 1.0);
  const int fade = static_cast<int>(std::lround(255.0 * (1.0 - f)));
  return blue ? detail::hex_color(fade, fade, 255) : detail::hex_color(255, fade, fade);
}

struct SvgPanel {
  std::string name;  // e.g. "m3_N11_s2"
  std::string svg;
};

/// One heatmap per combination of the three non-axis parameters. Cells that
/// are absent from the sweep or failed are drawn hatched.
inline std::vector<SvgPanel> emit_heatmaps(std::span<const SweepCell> cells, const HeatmapSpec& spec) {
  if (spec.x == spec.y) throw ParameterError("heatmap axes must differ");
  std::vector<SweepParam> panel_params;
  for (auto p : {SweepParam::memory, SweepParam::agents, SweepParam::strategies, SweepParam::liquidity,
                 SweepParam::dividend}) {
    if (p != spec.x && p != spec.y) panel_params.push_back(p);
  }

  std::vector<double> xs;
  std::vector<double> ys;
  std::map<std::vector<double>, std::map<std::pair<double, double>, const SweepCell*>> panels;
  for (const auto& cell : cells) {
    const double x = param_value(cell.config, spec.x);
    const double y = param_value(cell.config, spec.y);
    xs.push_back(x);
    ys.push_back(y);
    std::vector<double> key;
    for (auto p : panel_params) key.push_back(param_value(cell.config, p));
    panels[key][{x, y}] = &cell;
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  constexpr int cell_w = 90;
  constexpr int cell_h = 60;
  constexpr int left = 90;
  constexpr int top = 50;
  const int width = left + cell_w * static_cast<int>(xs.size()) + 20;
  const int height = top + cell_h * static_cast<int>(ys.size()) + 60;

  std::vector<SvgPanel> out;
  for (const auto& [key, grid] : panels) {
    std::string name;
    std::string title;
    for (std::size_t i = 0; i < panel_params.size(); ++i) {
      const std::string pname(param_name(panel_params[i]));
      name += (i ? "_" : "") + pname + detail::num(key[i], 10);
      title += (i ? ", " : "") + pname + " = " + detail::num(key[i], 10);
    }
    std::string svg = detail::svg_open(width, height);
    svg +=
        "<defs><pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"8\" height=\"8\">"
        "<rect width=\"8\" height=\"8\" fill=\"#ffffff\"/>"
        "<path d=\"M0,8 L8,0\" stroke=\"#888888\" stroke-width=\"1\"/></pattern></defs>\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" + std::to_string(height) +
           "\" fill=\"#ffffff\"/>\n";
    svg += detail::text(width / 2.0, 22, title, "middle", 14);
    for (std::size_t yi = 0; yi < ys.size(); ++yi) {
      // Largest y on top.
      const int row = static_cast<int>(ys.size() - 1 - yi);
      const int py = top + row * cell_h;
      svg += detail::text(left - 8, py + cell_h / 2.0 + 4, detail::num(ys[yi], 10), "end");
      for (std::size_t xi = 0; xi < xs.size(); ++xi) {
        const int px = left + static_cast<int>(xi) * cell_w;
        const auto it = grid.find({xs[xi], ys[yi]});
        const SweepCell* cell = it == grid.end() ? nullptr : it->second;
        std::string fill = "url(#hatch)";
        if (cell && cell->summary) fill = cell_color(cell->summary->f_spec(), cell->summary->f_fund());
        svg += "<rect x=\"" + std::to_string(px) + "\" y=\"" + std::to_string(py) + "\" width=\"" +
               std::to_string(cell_w) + "\" height=\"" + std::to_string(cell_h) + "\" fill=\"" + fill +
               "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        if (cell) {
          std::string label;
          try {
            label = "T=" + detail::num(cell->config.temperature().value, 4);
          } catch (const std::exception&) {
            label = "T=?";
          }
          svg += detail::text(px + cell_w / 2.0, py + cell_h / 2.0 + 4, label);
        }
      }
    }
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
      svg += detail::text(left + (static_cast<double>(xi) + 0.5) * cell_w, top + cell_h * static_cast<double>(ys.size()) + 18,
                          detail::num(xs[xi], 10));
    }
    svg += detail::text(left + cell_w * static_cast<double>(xs.size()) / 2.0,
                        top + cell_h * static_cast<double>(ys.size()) + 40, std::string(param_name(spec.x)));
    svg += detail::text(18, top + cell_h * static_cast<double>(ys.size()) / 2.0, std::string(param_name(spec.y)));
    svg += "</svg>\n";
    out.push_back(SvgPanel{name, std::move(svg)});
  }
  return out;
}

namespace detail {

struct Frame {
  double x0, x1, y0, y1;  // data ranges
  int left = 70, top = 30, width = 640, height = 360;

  double px(double x) const { return left + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * width; }
  double py(double y) const { return top + height - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * height; }
};

inline std::string axes(const Frame& f, std::string_view xlabel, std::string_view ylabel) {
  std::string s = "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" + num(f.width) +
                  "\" height=\"" + num(f.height) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
  s += text(f.left, f.top + f.height + 18, num(f.x0, 4));
  s += text(f.left + f.width, f.top + f.height + 18, num(f.x1, 4));
  s += text(f.left - 6, f.top + f.height, num(f.y0, 4), "end");
  s += text(f.left - 6, f.top + 10, num(f.y1, 4), "end");
  s += text(f.left + f.width / 2.0, f.top + f.height + 40, xlabel);
  s += text(16, f.top + f.height / 2.0, ylabel);
  return s;
}

inline std::string polyline(const Frame& f, std::span<const double> xs, std::span<const double> ys,
                            std::string_view color) {
  std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + num(f.px(xs[i])) + "," + num(f.py(ys[i]));
  s += "\"/>\n";
  return s;
}

}  // namespace detail

/// log10 price against time with the fundamental price and the 50% band.
inline std::string trajectory_svg(std::span<const double> prices, double fundamental_price) {
  std::vector<double> ts(prices.size());
  std::vector<double> ly(prices.size());
  for (std::size_t i = 0; i < prices.size(); ++i) {
    ts[i] = static_cast<double>(i);
    ly[i] = std::log10(prices[i]);
  }
  const double lo_band = std::log10(0.5 * fundamental_price);
  const double hi_band = std::log10(1.5 * fundamental_price);
  double y0 = lo_band;
  double y1 = hi_band;
  for (double v : ly) {
    y0 = std::min(y0, v);
    y1 = std::max(y1, v);
  }
  detail::Frame f{0.0, std::max(1.0, static_cast<double>(prices.size()) - 1.0), y0, y1};
  std::string svg = detail::svg_open(f.left + f.width + 30, f.top + f.height + 60);
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(f.left + f.width + 30) + "\" height=\"" +
         std::to_string(f.top + f.height + 60) + "\" fill=\"#ffffff\"/>\n";
  svg += "<rect x=\"" + detail::num(f.left) + "\" y=\"" + detail::num(f.py(hi_band)) + "\" width=\"" +
         detail::num(f.width) + "\" height=\"" + detail::num(f.py(lo_band) - f.py(hi_band)) +
         "\" fill=\"#fde0e0\"/>\n";
  const double lf = std::log10(fundamental_price);
  svg += "<line x1=\"" + detail::num(f.left) + "\" y1=\"" + detail::num(f.py(lf)) + "\" x2=\"" +
         detail::num(f.left + f.width) + "\" y2=\"" + detail::num(f.py(lf)) +
         "\" stroke=\"#cc0000\" stroke-dasharray=\"4,3\"/>\n";
  if (!prices.empty()) svg += detail::polyline(f, ts, ly, "#1f3fbf");
  svg += detail::axes(f, "t", "log10 P");
  svg += "</svg>\n";
  return svg;
}

/// Empirical landscape (points) and the fitted symmetric quartic (curve).
inline std::string landscape_svg(const LandscapeFit& fit) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (int i = 0; i <= 200; ++i) {
    const double o = -1.0 + i * 0.01;
    xs.push_back(o);
    ys.push_back(fit.polynomial(o));
  }
  double y0 = *std::min_element(ys.begin(), ys.end());
  double y1 = *std::max_element(ys.begin(), ys.end());
  for (double v : fit.landscape) {
    y0 = std::min(y0, v);
    y1 = std::max(y1, v);
  }
  detail::Frame f{-1.0, 1.0, y0, y1};
  std::string svg = detail::svg_open(f.left + f.width + 30, f.top + f.height + 60);
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(f.left + f.width + 30) + "\" height=\"" +
         std::to_string(f.top + f.height + 60) + "\" fill=\"#ffffff\"/>\n";
  for (std::size_t b = 0; b < fit.centers.size(); ++b) {
    svg += "<circle cx=\"" + detail::num(f.px(fit.centers[b])) + "\" cy=\"" + detail::num(f.py(fit.landscape[b])) +
           "\" r=\"3\" fill=\"#444444\"/>\n";
  }
  svg += detail::polyline(f, xs, ys, "#1f7f3f");
  svg += detail::axes(f, "o", "-log density");
  svg += "</svg>\n";
  return svg;
}

}  // namespace dgame::io
