#include "lgcpsynth/fem.hpp"

#include <vector>

namespace lgcp {

FemMatrices assemble_fem(const TriMesh& mesh) {
  const int n = mesh.n();
  FemMatrices fem;
  fem.C = Eigen::VectorXd::Zero(n);
  fem.dual_volumes = Eigen::VectorXd::Zero(n);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 9);

  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point p0 = mesh.vertices[tri[0]];
    const Point p1 = mesh.vertices[tri[1]];
    const Point p2 = mesh.vertices[tri[2]];
    const double area = 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
    if (!(area > 0.0))
      throw ConfigError("assemble_fem: triangle " + std::to_string(t) + " is degenerate");

    for (int i = 0; i < 3; ++i) {
      fem.C[tri[i]] += area / 3.0;
      fem.dual_volumes[tri[i]] += area / 3.0;
    }

    // grad(phi_i) = (b_i, c_i) / (2 area), with (i, j, k) cyclic.
    const double b[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
    const double c[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tri[i], tri[j], (b[i] * b[j] + c[i] * c[j]) / (4.0 * area));
  }

  fem.G = SparseMat(n, n);
  fem.G.setFromTriplets(trip.begin(), trip.end());
  fem.G.makeCompressed();
  return fem;
}

SparseMat spde_operator(const FemMatrices& fem, double kappa2) {
  if (!(kappa2 > 0.0)) throw ConfigError("spde_operator: kappa2 must be > 0");
  SparseMat L = fem.G;
  for (int i = 0; i < fem.n(); ++i) L.coeffRef(i, i) += kappa2 * fem.C[i];
  L.makeCompressed();
  return L;
}

SparseMat precision_matrix(const FemMatrices& fem, double kappa2) {
  const SparseMat L = spde_operator(fem, kappa2);
  const SparseMat Cinv_L = fem.C.cwiseInverse().asDiagonal() * L;
  SparseMat Q = (L * Cinv_L).pruned();
  Q.makeCompressed();
  return Q;
}

}  // namespace lgcp
