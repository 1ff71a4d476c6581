#pragma once

#include <Eigen/Dense>
#include <filesystem>

#include "lgcpsynth/common.hpp"

namespace lgcp {

// Regular raster of scalar values with bilinear interpolation between cell
// centers (clamped to the edge value in the outer half-cell margin).
// Standardized fields carry their transform so estimates can be reported on
// the original scale: original = value * standardize_sd + standardize_mean.
struct ScalarField {
  double x0 = 0.0, y0 = 0.0;  // lower-left corner of the covered rectangle
  double cell = 1.0;          // square cell size
  int ncols = 0, nrows = 0;
  Eigen::MatrixXd values;  // nrows x ncols indexed (row, col) from the y0/x0 corner
  double standardize_mean = 0.0;
  double standardize_sd = 1.0;

  Rect coverage() const {
    return {x0, y0, x0 + ncols * cell, y0 + nrows * cell};
  }
  bool covers(const Rect& r) const {
    const Rect c = coverage();
    const double tol = 1e-9 * cell;
    return r.xmin >= c.xmin - tol && r.xmax <= c.xmax + tol &&
           r.ymin >= c.ymin - tol && r.ymax <= c.ymax + tol;
  }
  Point cell_center(int row, int col) const {
    return {x0 + (col + 0.5) * cell, y0 + (row + 0.5) * cell};
  }
  double at(Point p) const;

  // Riemann sum of the raster (cell value times cell area).
  double integral() const { return values.sum() * cell * cell; }
};

struct RasterSpec {
  double x0 = 0.0, y0 = 0.0;
  double cell = 1.0;
  int ncols = 0, nrows = 0;

  static RasterSpec covering(const Rect& r, double cell);
};

ScalarField constant_field(const RasterSpec& spec, double value);

void write_esri_ascii(const ScalarField& f, const std::filesystem::path& path);
ScalarField read_esri_ascii(const std::filesystem::path& path);

}  // namespace lgcp
