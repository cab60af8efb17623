#pragma once

#include <array>
#include <string>
#include <vector>

// Minimal SVG emission (scatter + polyline, no styling dependencies). Data
// coordinates are mapped into the viewport with a shared bounding box over
// everything added; y increases upward.
namespace mixguide::harness {

class SvgFigure {
 public:
  SvgFigure(double width_px, double height_px);

  void add_scatter(const std::vector<std::array<double, 2>>& pts, const std::string& color,
                   double radius_px = 1.5);
  void add_polyline(const std::vector<std::array<double, 2>>& pts, const std::string& color,
                    double stroke_px = 1.0);

  // Renders and writes the document; throws std::runtime_error on I/O error.
  void write(const std::string& path) const;

 private:
  struct Scatter {
    std::vector<std::array<double, 2>> pts;
    std::string color;
    double radius;
  };
  struct Polyline {
    std::vector<std::array<double, 2>> pts;
    std::string color;
    double stroke;
  };

  void grow_bounds(const std::vector<std::array<double, 2>>& pts);

  double width_, height_;
  double min_x_ = 0.0, max_x_ = 0.0, min_y_ = 0.0, max_y_ = 0.0;
  bool have_bounds_ = false;
  std::vector<Scatter> scatters_;
  std::vector<Polyline> polylines_;
};

}  // namespace mixguide::harness
