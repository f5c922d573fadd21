#pragma once

#include <string>
#include <vector>

namespace faqtor {

// Minimal rectangle-grid SVG writer with a fixed blue-white-red diverging
// map: value 0 renders white, the +/- range endpoints render saturated red
// and blue.  One <rect> per cell.
struct SvgHeatmapSpec {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<double> values;  // row-major
  double v_min = -1.0;
  double v_max = 1.0;
  int cell_px = 4;
  std::string title;
};

std::string render_svg_heatmap(const SvgHeatmapSpec& spec);
void write_svg_heatmap_file(const SvgHeatmapSpec& spec,
                            const std::string& path);

}  // namespace faqtor
