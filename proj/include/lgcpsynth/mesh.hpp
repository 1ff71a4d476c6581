#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "lgcpsynth/common.hpp"

namespace lgcp {

// Structured triangulation of the (optionally extended) study rectangle:
// a regular grid of knots, each cell split along its lower-left/upper-right
// diagonal. Deterministic by construction; recorded in mesh metadata.
struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW vertex indices
  Rect domain;      // original study region
  Rect extent;      // meshed rectangle (domain grown by `extension`)
  double spacing = 0.0;    // requested knot spacing
  double extension = 0.0;  // boundary margin added on all sides
  int nx = 0, ny = 0;      // knots per axis
  double dx = 0.0, dy = 0.0;  // realized spacings (width/(nx-1), height/(ny-1))

  int n() const { return static_cast<int>(vertices.size()); }
  int n_cells_x() const { return nx - 1; }
  int n_cells_y() const { return ny - 1; }
  bool in_extent(Point p) const { return extent.contains(p); }
  double triangle_area(int t) const;
};

TriMesh build_mesh(const Rect& domain, double knot_spacing, double extension);

// Piecewise-linear basis evaluation: the barycentric coordinates of the
// triangle containing `p`. Ties on shared edges/vertices resolve to the
// lowest triangle index.
struct Basis {
  std::array<int, 3> index{};
  std::array<double, 3> weight{};
  int triangle = -1;
};

int find_triangle(const TriMesh& mesh, Point p);
Basis basis_eval(const TriMesh& mesh, Point p);

uint64_t mesh_hash(const TriMesh& mesh);

void save_mesh_json(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh load_mesh_json(const std::filesystem::path& path);

}  // namespace lgcp
