#include "faqtor/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace faqtor {

namespace {

struct Rgb {
  int r, g, b;
};

// Diverging map anchored at white for zero.  Positive values blend toward
// red (178, 24, 43), negative toward blue (33, 102, 172).
Rgb diverging_color(double v, double v_min, double v_max) {
  const double span = std::max(std::abs(v_min), std::abs(v_max));
  double t = span > 0.0 ? std::clamp(v / span, -1.0, 1.0) : 0.0;
  auto mix = [](int from, int to, double f) {
    return static_cast<int>(std::lround(from + (to - from) * f));
  };
  if (t >= 0.0)
    return {mix(255, 178, t), mix(255, 24, t), mix(255, 43, t)};
  return {mix(255, 33, -t), mix(255, 102, -t), mix(255, 172, -t)};
}

}  // namespace

std::string render_svg_heatmap(const SvgHeatmapSpec& spec) {
  if (spec.n_rows <= 0 || spec.n_cols <= 0 ||
      static_cast<int>(spec.values.size()) != spec.n_rows * spec.n_cols)
    throw std::invalid_argument("svg heatmap: bad grid shape");
  const int w = spec.n_cols * spec.cell_px;
  const int h = spec.n_rows * spec.cell_px;
  std::string out;
  out.reserve(spec.values.size() * 64 + 256);
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                w, h, w, h);
  out += buf;
  if (!spec.title.empty()) out += "<title>" + spec.title + "</title>\n";
  for (int i = 0; i < spec.n_rows; ++i) {
    for (int j = 0; j < spec.n_cols; ++j) {
      const Rgb c = diverging_color(spec.values[i * spec.n_cols + j],
                                    spec.v_min, spec.v_max);
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" "
                    "fill=\"rgb(%d,%d,%d)\"/>\n",
                    j * spec.cell_px, (spec.n_rows - 1 - i) * spec.cell_px,
                    spec.cell_px, spec.cell_px, c.r, c.g, c.b);
      out += buf;
    }
  }
  out += "</svg>\n";
  return out;
}

void write_svg_heatmap_file(const SvgHeatmapSpec& spec,
                            const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << render_svg_heatmap(spec);
}

}  // namespace faqtor
