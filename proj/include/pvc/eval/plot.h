#ifndef PVC_EVAL_PLOT_H_
#define PVC_EVAL_PLOT_H_

#include <filesystem>
#include <string>
#include <vector>

namespace pvc {

// One polyline; NaN y values break the line.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
};

// Standalone SVG line chart with axes, tick labels and a legend.
std::string render_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);
void write_line_plot(const std::filesystem::path& path, const PlotSpec& spec,
                     const std::vector<PlotSeries>& series);

}  // namespace pvc

#endif  // PVC_EVAL_PLOT_H_
