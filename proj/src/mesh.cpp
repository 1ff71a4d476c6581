#include "lgcpsynth/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace lgcp {

namespace {

// Barycentric coordinates of p in triangle (a, b, c); assumes positive area.
std::array<double, 3> barycentric(Point a, Point b, Point c, Point p) {
  const double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  const double l1 = ((b.x - p.x) * (c.y - p.y) - (c.x - p.x) * (b.y - p.y)) / det;
  const double l2 = ((c.x - p.x) * (a.y - p.y) - (a.x - p.x) * (c.y - p.y)) / det;
  return {l1, l2, 1.0 - l1 - l2};
}

constexpr double kBaryTol = 1e-12;

}  // namespace

double TriMesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  const Point a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

TriMesh build_mesh(const Rect& domain, double knot_spacing, double extension) {
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
    throw ConfigError("build_mesh: invalid domain (non-positive side length)");
  if (!(knot_spacing > 0.0)) throw ConfigError("build_mesh: knot_spacing must be > 0");
  if (extension < 0.0) throw ConfigError("build_mesh: extension must be >= 0");

  TriMesh mesh;
  mesh.domain = domain;
  mesh.extent = domain.grown(extension);
  mesh.spacing = knot_spacing;
  mesh.extension = extension;

  const double w = mesh.extent.width(), h = mesh.extent.height();
  const int ncx = std::max(1, static_cast<int>(std::ceil(w / knot_spacing - 1e-9)));
  const int ncy = std::max(1, static_cast<int>(std::ceil(h / knot_spacing - 1e-9)));
  mesh.nx = ncx + 1;
  mesh.ny = ncy + 1;
  mesh.dx = w / ncx;
  mesh.dy = h / ncy;

  mesh.vertices.reserve(static_cast<size_t>(mesh.nx) * mesh.ny);
  for (int iy = 0; iy < mesh.ny; ++iy)
    for (int ix = 0; ix < mesh.nx; ++ix)
      mesh.vertices.push_back({mesh.extent.xmin + ix * mesh.dx,
                               mesh.extent.ymin + iy * mesh.dy});

  mesh.triangles.reserve(static_cast<size_t>(ncx) * ncy * 2);
  for (int cy = 0; cy < ncy; ++cy) {
    for (int cx = 0; cx < ncx; ++cx) {
      const int v00 = cy * mesh.nx + cx;
      const int v10 = v00 + 1;
      const int v01 = v00 + mesh.nx;
      const int v11 = v01 + 1;
      mesh.triangles.push_back({v00, v10, v11});  // below the diagonal
      mesh.triangles.push_back({v00, v11, v01});  // above the diagonal
    }
  }
  return mesh;
}

int find_triangle(const TriMesh& mesh, Point p) {
  if (!mesh.in_extent(p))
    throw OutOfDomainError("find_triangle: point outside meshed region");

  // Hand-built meshes carry no grid structure; scan triangles in index order,
  // which realizes the lowest-index tie rule directly.
  if (mesh.nx < 2 || mesh.ny < 2) {
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      const auto l = barycentric(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                 mesh.vertices[tri[2]], p);
      if (l[0] >= -kBaryTol && l[1] >= -kBaryTol && l[2] >= -kBaryTol)
        return static_cast<int>(t);
    }
    throw OutOfDomainError("find_triangle: point outside meshed region");
  }

  const int ncx = mesh.n_cells_x(), ncy = mesh.n_cells_y();
  int cx = std::min(ncx - 1, static_cast<int>((p.x - mesh.extent.xmin) / mesh.dx));
  int cy = std::min(ncy - 1, static_cast<int>((p.y - mesh.extent.ymin) / mesh.dy));

  // Scan candidate cells in ascending triangle-index order so that points on
  // shared edges land in the lowest-index containing triangle.
  for (int oy = -1; oy <= 0; ++oy) {
    const int y = cy + oy;
    if (y < 0 || y >= ncy) continue;
    for (int ox = -1; ox <= 0; ++ox) {
      const int x = cx + ox;
      if (x < 0 || x >= ncx) continue;
      const int base = 2 * (y * ncx + x);
      for (int t = base; t < base + 2; ++t) {
        const auto& tri = mesh.triangles[t];
        const auto l = barycentric(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                   mesh.vertices[tri[2]], p);
        if (l[0] >= -kBaryTol && l[1] >= -kBaryTol && l[2] >= -kBaryTol) return t;
      }
    }
  }
  // In-extent points always fall in the cell located above; reaching here
  // means the barycentric tolerance was violated by rounding.
  throw NumericError("find_triangle: point location failed");
}

Basis basis_eval(const TriMesh& mesh, Point p) {
  const int t = find_triangle(mesh, p);
  const auto& tri = mesh.triangles[t];
  auto l = barycentric(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                       mesh.vertices[tri[2]], p);
  for (double& v : l) v = std::clamp(v, 0.0, 1.0);
  Basis b;
  b.triangle = t;
  b.index = tri;
  b.weight = l;
  return b;
}

uint64_t mesh_hash(const TriMesh& mesh) {
  uint64_t h = 0xcbf29ce484222325ull;
  h = hash_combine(h, static_cast<uint64_t>(mesh.n()));
  h = hash_combine(h, mesh.spacing);
  h = hash_combine(h, mesh.extension);
  for (double v : {mesh.domain.xmin, mesh.domain.ymin, mesh.domain.xmax, mesh.domain.ymax})
    h = hash_combine(h, v);
  for (const auto& v : mesh.vertices) {
    h = hash_combine(h, v.x);
    h = hash_combine(h, v.y);
  }
  for (const auto& t : mesh.triangles)
    for (int i : t) h = hash_combine(h, static_cast<uint64_t>(i));
  return h;
}

void save_mesh_json(const TriMesh& mesh, const std::filesystem::path& path) {
  nlohmann::json j;
  j["schema"] = 1;
  j["construction"] = "structured-grid-diagonal-split";
  j["spacing"] = mesh.spacing;
  j["extension"] = mesh.extension;
  j["domain"] = {mesh.domain.xmin, mesh.domain.ymin, mesh.domain.xmax, mesh.domain.ymax};
  j["grid"] = {{"nx", mesh.nx}, {"ny", mesh.ny}};
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const auto& v : mesh.vertices) verts.push_back({v.x, v.y});
  auto& tris = j["triangles"] = nlohmann::json::array();
  for (const auto& t : mesh.triangles) tris.push_back({t[0], t[1], t[2]});
  std::ofstream out(path);
  if (!out) throw ConfigError("save_mesh_json: cannot write " + path.string());
  out << j.dump(2) << "\n";
}

TriMesh load_mesh_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_mesh_json: cannot read " + path.string());
  nlohmann::json j;
  in >> j;
  const auto dom = j.at("domain");
  Rect domain{dom.at(0), dom.at(1), dom.at(2), dom.at(3)};
  TriMesh mesh = build_mesh(domain, j.at("spacing"), j.at("extension"));
  // The grid parameters fully determine the mesh; verify the stored geometry
  // matches to guard against hand-edited files.
  if (j.at("vertices").size() != static_cast<size_t>(mesh.n()) ||
      j.at("triangles").size() != mesh.triangles.size())
    throw ConfigError("load_mesh_json: stored mesh inconsistent with its parameters");
  return mesh;
}

}  // namespace lgcp
