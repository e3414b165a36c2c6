#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sradam/bench/aggregate.hpp"

namespace sradam::bench {

/// Affine data-to-pixel map for one axis.
struct LinMap {
  double x0 = 0.0, x1 = 1.0;    ///< data range (x1 > x0)
  double px0 = 0.0, px1 = 1.0;  ///< pixel range

  double operator()(double x) const {
    return px0 + (x - x0) / (x1 - x0) * (px1 - px0);
  }
};

/// mean +/- std band edges.
struct ErrorBand {
  double lo = 0.0, hi = 0.0;
};
ErrorBand error_band(double mean, double std);

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::vector<double> y_lo, y_hi;  ///< optional band, same length as x
};

/// Minimal deterministic SVG line chart with an optional shaded band per
/// series and a legend.
void write_line_chart_svg(const std::filesystem::path& path,
                          const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          std::span<const Series> series);

struct Bar {
  std::string label;
  double value = 0.0;
  double err = 0.0;
};

void write_bar_chart_svg(const std::filesystem::path& path,
                         const std::string& title, const std::string& y_label,
                         std::span<const Bar> bars);

/// Test-loss curves and best-accuracy bars per (dataset, model, noise,
/// batch) slice, each with a CSV sidecar holding the plotted numbers.
/// Returns the created file names (relative to out_dir).
std::vector<std::string> emit_plots(std::span<const RunRecord> records,
                                    const std::filesystem::path& out_dir);

}  // namespace sradam::bench
