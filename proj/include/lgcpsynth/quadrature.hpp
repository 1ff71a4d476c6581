#pragma once

#include <functional>

#include "lgcpsynth/common.hpp"

namespace lgcp {

// Midpoint quadrature of f over the disk of radius r centered at `center`,
// via the change of variables that maps the disk onto the square [-1,1]^2:
//   x = g(y)*xt + x_c,  y = r*yt + y_c,  g(y) = sqrt(r^2 - (y - y_c)^2)
// The square is partitioned into M equal cells (M must be a perfect square).
// The integrand defines its own support; callers implementing an
// intersection with a study region return 0 outside it.
double ball_quadrature(const std::function<double(Point)>& f, Point center,
                       double r, int M);

// Midpoint quadrature of f over a rectangle on a lattice of square-ish cells
// of side at most `cell`. Used to normalize risk densities over the study
// region; `cell` is typically the mesh spacing divided by 2^refinement.
double rect_quadrature(const std::function<double(Point)>& f, const Rect& rect,
                       double cell);

}  // namespace lgcp
