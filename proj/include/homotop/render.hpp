#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "homotop/common.hpp"
#include "homotop/csv.hpp"
#include "homotop/persistence.hpp"

namespace homotop {

// homology dimension -> stroke color (H1 red, H2 blue; H0 black)
inline const char* homology_color(int dim) {
  switch (dim) {
    case 0: return "#000000";
    case 1: return "#cc0000";
    case 2: return "#0000cc";
    default: return "#888888";
  }
}

namespace svg {

struct Canvas {
  double width = 640, height = 420;
  double margin = 48;
  std::string body;

  void line(double x1, double y1, double x2, double y2, const char* color,
            double stroke = 1.5, const char* dash = nullptr) {
    body += "<line x1=\"" + format_double(x1) + "\" y1=\"" + format_double(y1) +
            "\" x2=\"" + format_double(x2) + "\" y2=\"" + format_double(y2) +
            "\" stroke=\"" + color + "\" stroke-width=\"" +
            format_double(stroke) + "\"";
    if (dash) body += std::string(" stroke-dasharray=\"") + dash + "\"";
    body += "/>\n";
  }
  void circle(double cx, double cy, double r, const char* color) {
    body += "<circle cx=\"" + format_double(cx) + "\" cy=\"" +
            format_double(cy) + "\" r=\"" + format_double(r) + "\" fill=\"" +
            color + "\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 12) {
    body += "<text x=\"" + format_double(x) + "\" y=\"" + format_double(y) +
            "\" font-family=\"monospace\" font-size=\"" +
            std::to_string(size) + "\">" + s + "</text>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts,
                const char* color, double stroke = 1.5) {
    body += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
            "\" stroke-width=\"" + format_double(stroke) + "\" points=\"";
    for (const auto& [x, y] : pts)
      body += format_double(x) + "," + format_double(y) + " ";
    body += "\"/>\n";
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write '" + path + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << format_double(width) << "\" height=\"" << format_double(height)
        << "\" viewBox=\"0 0 " << format_double(width) << ' '
        << format_double(height) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body << "</svg>\n";
    if (!out) throw io_error("write failed for '" + path + "'");
  }
};

}  // namespace svg

// Barcode plot: horizontal segments grouped by dimension, essential bars get
// an arrowhead at the cap.
inline void render_barcode(const Barcode& barcode, const std::string& path,
                           const std::string& title = "") {
  svg::Canvas canvas;
  canvas.text(canvas.margin, 20, title.empty() ? "barcode" : title, 14);
  const double x0 = canvas.margin, x1 = canvas.width - canvas.margin;
  const double y0 = canvas.height - canvas.margin, y1 = 40;
  const double cap = barcode.cap > 0 ? barcode.cap : 1.0;
  auto sx = [&](double value) { return x0 + (x1 - x0) * value / cap; };
  canvas.line(x0, y0, x1, y0, "#000000", 1.0);
  canvas.text(x0, y0 + 16, "0");
  canvas.text(x1 - 24, y0 + 16, format_double(cap));
  if (barcode.intervals.empty()) {
    canvas.text((x0 + x1) / 2 - 30, (y0 + y1) / 2, "(empty)");
    canvas.save(path);
    return;
  }
  const double row_height =
      (y0 - y1) / static_cast<double>(barcode.intervals.size() + 1);
  double y = y0 - row_height;
  int last_dim = -1;
  for (const auto& interval : barcode.intervals) {
    if (interval.dim != last_dim) {
      last_dim = interval.dim;
      canvas.text(4, y + 4, "H" + std::to_string(interval.dim), 12);
    }
    canvas.line(sx(interval.birth), y, sx(interval.death), y,
                homology_color(interval.dim), 2.0);
    if (interval.essential) {
      canvas.line(sx(interval.death), y, sx(interval.death) - 6, y - 4,
                  homology_color(interval.dim), 1.5);
      canvas.line(sx(interval.death), y, sx(interval.death) - 6, y + 4,
                  homology_color(interval.dim), 1.5);
    }
    y -= row_height;
  }
  canvas.save(path);
}

// Persistence diagram scatter: birth on x, death on y, diagonal reference,
// essential classes drawn on the cap line.
inline void render_diagram(const PersistenceDiagram& diagram,
                           const std::string& path,
                           const std::string& title = "") {
  svg::Canvas canvas;
  canvas.text(canvas.margin, 20, title.empty() ? "persistence diagram" : title,
              14);
  const double x0 = canvas.margin, x1 = canvas.width - canvas.margin;
  const double y0 = canvas.height - canvas.margin, y1 = 40;
  const double cap = default_barcode_cap(diagram);
  auto sx = [&](double v) { return x0 + (x1 - x0) * v / cap; };
  auto sy = [&](double v) { return y0 - (y0 - y1) * v / cap; };
  canvas.line(x0, y0, x1, y0, "#000000", 1.0);
  canvas.line(x0, y0, x0, y1, "#000000", 1.0);
  canvas.line(sx(0), sy(0), sx(cap), sy(cap), "#aaaaaa", 1.0, "4 3");
  canvas.text(x0, y0 + 16, "0");
  canvas.text(x1 - 24, y0 + 16, format_double(cap));
  bool any = false;
  for (size_t dim = 0; dim < diagram.by_dim.size(); ++dim)
    for (const auto& p : diagram.by_dim[dim]) {
      any = true;
      const double death = p.essential() ? cap : p.death;
      canvas.circle(sx(p.birth), sy(death), 3.0,
                    homology_color(static_cast<int>(dim)));
    }
  if (!any) canvas.text((x0 + x1) / 2 - 30, (y0 + y1) / 2, "(empty)");
  canvas.save(path);
}

// Orthographic 2D projection of 3D points (fixed yaw/pitch view).
inline void render_scatter3(const Eigen::MatrixXd& points,
                            const std::string& path,
                            const std::string& title = "") {
  if (points.rows() > 0 && points.cols() != 3)
    throw validation_error("render_scatter3: expected 3 columns");
  svg::Canvas canvas;
  canvas.text(canvas.margin, 20, title.empty() ? "scatter3" : title, 14);
  if (points.rows() == 0) {
    canvas.text(canvas.width / 2 - 30, canvas.height / 2, "(empty)");
    canvas.save(path);
    return;
  }
  const double yaw = 0.52, pitch = 0.35;
  const double cy = std::cos(yaw), sy_ = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  Eigen::MatrixXd projected(points.rows(), 2);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double x = points(i, 0), y = points(i, 1), z = points(i, 2);
    const double rx = cy * x + sy_ * z;
    const double rz = -sy_ * x + cy * z;
    const double ry = cp * y - sp * rz;
    projected(i, 0) = rx;
    projected(i, 1) = ry;
  }
  const double min_x = projected.col(0).minCoeff(),
               max_x = projected.col(0).maxCoeff();
  const double min_y = projected.col(1).minCoeff(),
               max_y = projected.col(1).maxCoeff();
  const double span_x = std::max(max_x - min_x, 1e-12);
  const double span_y = std::max(max_y - min_y, 1e-12);
  const double x0 = canvas.margin, x1 = canvas.width - canvas.margin;
  const double y0 = canvas.height - canvas.margin, y1 = 40;
  for (Eigen::Index i = 0; i < projected.rows(); ++i) {
    const double px = x0 + (x1 - x0) * (projected(i, 0) - min_x) / span_x;
    const double py = y0 - (y0 - y1) * (projected(i, 1) - min_y) / span_y;
    canvas.circle(px, py, 2.0, "#225588");
  }
  canvas.save(path);
}

// Distance-vs-channel polylines, one per homology dimension.
struct DistanceSeries {
  int dim = 1;
  std::vector<double> values;  // one entry per channel, in channel order
};

inline void render_distance_series(const std::vector<DistanceSeries>& series,
                                   const std::string& path,
                                   const std::string& title = "") {
  svg::Canvas canvas;
  canvas.text(canvas.margin, 20, title.empty() ? "distances" : title, 14);
  const double x0 = canvas.margin, x1 = canvas.width - canvas.margin;
  const double y0 = canvas.height - canvas.margin, y1 = 40;
  canvas.line(x0, y0, x1, y0, "#000000", 1.0);
  canvas.line(x0, y0, x0, y1, "#000000", 1.0);
  canvas.text(x1 - 56, y0 + 16, "channel");
  size_t max_len = 0;
  double max_v = 0;
  for (const auto& s : series) {
    max_len = std::max(max_len, s.values.size());
    for (double v : s.values) max_v = std::max(max_v, v);
  }
  if (max_len == 0) {
    canvas.text((x0 + x1) / 2 - 30, (y0 + y1) / 2, "(empty)");
    canvas.save(path);
    return;
  }
  if (max_v <= 0) max_v = 1.0;
  for (const auto& s : series) {
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 0; i < s.values.size(); ++i) {
      const double px =
          x0 + (x1 - x0) * (max_len > 1 ? static_cast<double>(i) /
                                              static_cast<double>(max_len - 1)
                                        : 0.5);
      pts.emplace_back(px, y0 - (y0 - y1) * s.values[i] / max_v);
    }
    canvas.polyline(pts, homology_color(s.dim), 1.8);
    for (const auto& [px, py] : pts)
      canvas.circle(px, py, 2.0, homology_color(s.dim));
  }
  double legend_y = 36;
  for (const auto& s : series) {
    canvas.text(x1 - 40, legend_y, "H" + std::to_string(s.dim), 12);
    canvas.line(x1 - 64, legend_y - 4, x1 - 46, legend_y - 4,
                homology_color(s.dim), 2.0);
    legend_y += 16;
  }
  canvas.save(path);
}

}  // namespace homotop
