#pragma once

#include <string>
#include <utility>
#include <vector>

namespace milattn {

/// Tiny SVG writer. Coordinates are in pixels with the origin top-left;
/// numbers are printed with fixed precision so output is reproducible.
class SvgCanvas {
 public:
  SvgCanvas(double width, double height);

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "none");
  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0, bool dashed = false);
  void polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke,
                double width = 1.5);
  // anchor: "start", "middle" or "end".
  void text(double x, double y, const std::string& s, double size = 11.0,
            const std::string& anchor = "start");

  std::string str() const;

 private:
  double width_, height_;
  std::string body_;
};

/// Linear map from a data interval onto a pixel interval.
struct Axis {
  double lo, hi, px_lo, px_hi;
  double operator()(double v) const { return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo); }
};

std::string svg_escape(const std::string& s);

}  // namespace milattn
