#include "lgcpsynth/quadrature.hpp"

#include <cmath>

namespace lgcp {

double ball_quadrature(const std::function<double(Point)>& f, Point center,
                       double r, int M) {
  if (!(r > 0.0)) throw ConfigError("ball_quadrature: radius must be > 0");
  const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(M))));
  if (M < 4 || m * m != M)
    throw ConfigError("ball_quadrature: M must be a perfect square >= 4");

  const double step = 2.0 / m;
  const double cell_area = step * step;
  double sum = 0.0;
  for (int j = 0; j < m; ++j) {
    const double yt = -1.0 + (j + 0.5) * step;
    const double y = r * yt + center.y;
    const double g = std::sqrt(std::max(0.0, r * r - (y - center.y) * (y - center.y)));
    if (g == 0.0) continue;
    double row = 0.0;
    for (int i = 0; i < m; ++i) {
      const double xt = -1.0 + (i + 0.5) * step;
      row += f({g * xt + center.x, y});
    }
    sum += row * r * g * cell_area;
  }
  return sum;
}

double rect_quadrature(const std::function<double(Point)>& f, const Rect& rect,
                       double cell) {
  if (!(cell > 0.0)) throw ConfigError("rect_quadrature: cell must be > 0");
  const int nx = std::max(1, static_cast<int>(std::ceil(rect.width() / cell - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(rect.height() / cell - 1e-9)));
  const double hx = rect.width() / nx;
  const double hy = rect.height() / ny;
  double sum = 0.0;
  for (int j = 0; j < ny; ++j) {
    const double y = rect.ymin + (j + 0.5) * hy;
    double row = 0.0;
    for (int i = 0; i < nx; ++i) row += f({rect.xmin + (i + 0.5) * hx, y});
    sum += row * hx * hy;
  }
  return sum;
}

}  // namespace lgcp
