#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace grushin2d::io {

/// Writes a double with 17 significant digits (round-trip exact).
std::ostream& write_g17(std::ostream& os, double v);
std::string g17(double v);

/// Minimal SVG emitter: fixed square viewport, world window mapped onto it.
/// Default world window is [-2,2]^2 per the loci export convention.
class SvgWriter {
public:
  SvgWriter(double x0 = -2, double x1 = 2, double y0 = -2, double y1 = 2, int size_px = 800);

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                double width_px = 1.5, bool closed = false);
  void circle(double x, double y, double radius_px, const std::string& color);
  void text(double x, double y, const std::string& s, const std::string& color = "#333");
  std::string str() const;
  void save(const std::string& path) const;

private:
  double px(double x) const;
  double py(double y) const;
  double x0_, x1_, y0_, y1_;
  int size_;
  std::string body_;
};

}  // namespace grushin2d::io
