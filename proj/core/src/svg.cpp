#include <cstdio>
#include <string>

#include "contourline/stylize.hpp"

namespace contourline {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void append_polyline_path(std::string& out, const std::vector<Vec2>& pts, bool closed) {
  for (std::size_t i = 0; i < pts.size(); i++) {
    out += i == 0 ? "M" : "L";
    out += fmt(pts[i].x());
    out += ",";
    out += fmt(pts[i].y());
  }
  if (closed) out += "Z";
}

std::string dash_attr(const std::vector<double>& dash) {
  if (dash.empty()) return {};
  std::string s = " stroke-dasharray=\"";
  for (std::size_t i = 0; i < dash.size(); i++) {
    if (i) s += ",";
    s += fmt(dash[i]);
  }
  s += "\"";
  return s;
}

}  // namespace

std::string emit_svg(std::span<const Stroke> strokes, const DocStyle& style, int canvas_w,
                     int canvas_h) {
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(canvas_w) +
         "\" height=\"" + std::to_string(canvas_h) + "\" viewBox=\"0 0 " +
         std::to_string(canvas_w) + " " + std::to_string(canvas_h) + "\">\n";
  if (!style.background.empty())
    out += "<rect width=\"100%\" height=\"100%\" fill=\"" + style.background + "\"/>\n";

  for (const auto& stroke : strokes) {
    if (stroke.center.size() < 2) continue;
    const StrokeStyle& ss = stroke.vis == Visibility::Visible ? style.visible : style.hidden;

    const bool variable_width = ss.taper && !stroke.ribs.empty();
    std::string d;
    if (variable_width) {
      // filled outline: left rib side out, right rib side back
      std::vector<Vec2> outline;
      outline.reserve(stroke.center.size() * 2);
      for (std::size_t i = 0; i < stroke.center.size(); i++)
        outline.push_back(stroke.center[i] + stroke.ribs[i]);
      for (std::size_t i = stroke.center.size(); i-- > 0;)
        outline.push_back(stroke.center[i] - stroke.ribs[i]);
      append_polyline_path(d, outline, true);
      out += "<path d=\"" + d + "\" fill=\"" + ss.color + "\" fill-opacity=\"" +
             fmt(ss.opacity) + "\" stroke=\"none\"/>\n";
    } else {
      const bool closed =
          stroke.closed && (stroke.center.front() - stroke.center.back()).norm() < 1e-9;
      std::vector<Vec2> pts = stroke.center;
      if (closed) pts.pop_back();
      append_polyline_path(d, pts, closed);
      out += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + ss.color + "\" stroke-width=\"" +
             fmt(ss.width_px) + "\" stroke-opacity=\"" + fmt(ss.opacity) +
             "\" stroke-linecap=\"round\" stroke-linejoin=\"round\"" + dash_attr(ss.dash) +
             "/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace contourline
