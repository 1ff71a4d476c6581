#include "lgcpsynth/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lgcp {

double ScalarField::at(Point p) const {
  if (ncols <= 0 || nrows <= 0) throw ConfigError("ScalarField::at: empty raster");
  // Continuous cell-center coordinates, clamped so edge queries take the
  // nearest cell value instead of extrapolating.
  const double cx = std::clamp((p.x - x0) / cell - 0.5, 0.0, ncols - 1.0);
  const double cy = std::clamp((p.y - y0) / cell - 0.5, 0.0, nrows - 1.0);
  const int c0 = std::min(ncols - 2 >= 0 ? ncols - 2 : 0, static_cast<int>(cx));
  const int r0 = std::min(nrows - 2 >= 0 ? nrows - 2 : 0, static_cast<int>(cy));
  const int c1 = std::min(ncols - 1, c0 + 1);
  const int r1 = std::min(nrows - 1, r0 + 1);
  const double tx = std::clamp(cx - c0, 0.0, 1.0);
  const double ty = std::clamp(cy - r0, 0.0, 1.0);
  const double v00 = values(r0, c0), v01 = values(r0, c1);
  const double v10 = values(r1, c0), v11 = values(r1, c1);
  return (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11);
}

RasterSpec RasterSpec::covering(const Rect& r, double cell) {
  if (!(cell > 0.0)) throw ConfigError("RasterSpec: cell size must be > 0");
  RasterSpec spec;
  spec.cell = cell;
  spec.x0 = r.xmin;
  spec.y0 = r.ymin;
  spec.ncols = std::max(1, static_cast<int>(std::ceil(r.width() / cell - 1e-9)));
  spec.nrows = std::max(1, static_cast<int>(std::ceil(r.height() / cell - 1e-9)));
  return spec;
}

ScalarField constant_field(const RasterSpec& spec, double value) {
  ScalarField f;
  f.x0 = spec.x0;
  f.y0 = spec.y0;
  f.cell = spec.cell;
  f.ncols = spec.ncols;
  f.nrows = spec.nrows;
  f.values = Eigen::MatrixXd::Constant(spec.nrows, spec.ncols, value);
  return f;
}

void write_esri_ascii(const ScalarField& f, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_esri_ascii: cannot write " + path.string());
  out << "ncols " << f.ncols << "\n";
  out << "nrows " << f.nrows << "\n";
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "xllcorner " << num(f.x0) << "\n";
  out << "yllcorner " << num(f.y0) << "\n";
  out << "cellsize " << num(f.cell) << "\n";
  out << "NODATA_value -9999\n";
  // ESRI order: first data row is the top of the grid.
  for (int r = f.nrows - 1; r >= 0; --r) {
    for (int c = 0; c < f.ncols; ++c) {
      if (c) out << ' ';
      out << num(f.values(r, c));
    }
    out << "\n";
  }
}

ScalarField read_esri_ascii(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_esri_ascii: cannot read " + path.string());
  ScalarField f;
  std::string key;
  double nodata = -9999;
  for (int i = 0; i < 6; ++i) {
    in >> key;
    if (key == "ncols")
      in >> f.ncols;
    else if (key == "nrows")
      in >> f.nrows;
    else if (key == "xllcorner")
      in >> f.x0;
    else if (key == "yllcorner")
      in >> f.y0;
    else if (key == "cellsize")
      in >> f.cell;
    else if (key == "NODATA_value")
      in >> nodata;
    else
      throw ConfigError("read_esri_ascii: unexpected header key '" + key + "'");
  }
  if (f.ncols <= 0 || f.nrows <= 0 || !(f.cell > 0))
    throw ConfigError("read_esri_ascii: bad raster header");
  f.values.resize(f.nrows, f.ncols);
  for (int r = f.nrows - 1; r >= 0; --r)
    for (int c = 0; c < f.ncols; ++c)
      if (!(in >> f.values(r, c)))
        throw ConfigError("read_esri_ascii: truncated raster data");
  return f;
}

}  // namespace lgcp
