#include "grushin2d/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace grushin2d::io {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ostream& write_g17(std::ostream& os, double v) {
  return os << g17(v);
}

SvgWriter::SvgWriter(double x0, double x1, double y0, double y1, int size_px)
    : x0_(x0), x1_(x1), y0_(y0), y1_(y1), size_(size_px) {}

double SvgWriter::px(double x) const { return (x - x0_) / (x1_ - x0_) * size_; }
double SvgWriter::py(double y) const { return (y1_ - y) / (y1_ - y0_) * size_; }  // y up

void SvgWriter::polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& color, double width_px, bool closed) {
  if (pts.empty()) return;
  std::ostringstream ss;
  ss << "<path d=\"";
  for (size_t i = 0; i < pts.size(); ++i) {
    ss << (i == 0 ? 'M' : 'L');
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f %.3f", px(pts[i].first), py(pts[i].second));
    ss << buf;
  }
  if (closed) ss << 'Z';
  ss << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width_px << "\"/>\n";
  body_ += ss.str();
}

void SvgWriter::circle(double x, double y, double radius_px, const std::string& color) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.2f\" fill=\"%s\"/>\n",
                px(x), py(y), radius_px, color.c_str());
  body_ += buf;
}

void SvgWriter::text(double x, double y, const std::string& s, const std::string& color) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" fill=\"%s\">", px(x), py(y),
                color.c_str());
  body_ += buf;
  body_ += s;
  body_ += "</text>\n";
}

std::string SvgWriter::str() const {
  std::ostringstream ss;
  ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_ << "\" height=\"" << size_
     << "\" viewBox=\"0 0 " << size_ << ' ' << size_ << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << body_ << "</svg>\n";
  return ss.str();
}

void SvgWriter::save(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("SvgWriter: cannot open " + path);
  f << str();
}

}  // namespace grushin2d::io
