#include "mixguide/harness/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mixguide::harness {

namespace {

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

SvgFigure::SvgFigure(double width_px, double height_px) : width_(width_px), height_(height_px) {}

void SvgFigure::grow_bounds(const std::vector<std::array<double, 2>>& pts) {
  for (const auto& p : pts) {
    if (!have_bounds_) {
      min_x_ = max_x_ = p[0];
      min_y_ = max_y_ = p[1];
      have_bounds_ = true;
    } else {
      min_x_ = std::min(min_x_, p[0]);
      max_x_ = std::max(max_x_, p[0]);
      min_y_ = std::min(min_y_, p[1]);
      max_y_ = std::max(max_y_, p[1]);
    }
  }
}

void SvgFigure::add_scatter(const std::vector<std::array<double, 2>>& pts,
                            const std::string& color, double radius_px) {
  grow_bounds(pts);
  scatters_.push_back({pts, color, radius_px});
}

void SvgFigure::add_polyline(const std::vector<std::array<double, 2>>& pts,
                             const std::string& color, double stroke_px) {
  grow_bounds(pts);
  polylines_.push_back({pts, color, stroke_px});
}

void SvgFigure::write(const std::string& path) const {
  const double margin = 0.05;
  double sx = max_x_ - min_x_, sy = max_y_ - min_y_;
  if (sx <= 0.0) sx = 1.0;
  if (sy <= 0.0) sy = 1.0;
  const double x0 = min_x_ - margin * sx, x1 = max_x_ + margin * sx;
  const double y0 = min_y_ - margin * sy, y1 = max_y_ + margin * sy;
  auto mapx = [&](double x) { return (x - x0) / (x1 - x0) * width_; };
  auto mapy = [&](double y) { return height_ - (y - y0) / (y1 - y0) * height_; };

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width_) << "\" height=\""
     << px(height_) << "\" viewBox=\"0 0 " << px(width_) << " " << px(height_) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& s : scatters_) {
    os << "<g fill=\"" << s.color << "\" fill-opacity=\"0.6\">\n";
    for (const auto& p : s.pts)
      os << "<circle cx=\"" << px(mapx(p[0])) << "\" cy=\"" << px(mapy(p[1])) << "\" r=\""
         << px(s.radius) << "\"/>\n";
    os << "</g>\n";
  }
  for (const auto& l : polylines_) {
    os << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"" << px(l.stroke)
       << "\" points=\"";
    for (std::size_t i = 0; i < l.pts.size(); ++i) {
      if (i) os << ' ';
      os << px(mapx(l.pts[i][0])) << ',' << px(mapy(l.pts[i][1]));
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  os.close();
  if (os.fail()) throw std::runtime_error("write failed: " + path);
}

}  // namespace mixguide::harness
