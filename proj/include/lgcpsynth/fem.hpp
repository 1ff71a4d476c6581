#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "lgcpsynth/mesh.hpp"

namespace lgcp {

using SparseMat = Eigen::SparseMatrix<double>;

// Linear-element matrices of the Matern field approximation, plus the
// dual-cell volumes used as quadrature weights for intensity integrals.
// The mass matrix is lumped, so C is stored as its diagonal and C^{-1} is
// exact; dual_volumes equals the lumped diagonal (centroid dual).
struct FemMatrices {
  Eigen::VectorXd C;             // lumped mass diagonal, n
  SparseMat G;                   // stiffness, n x n
  Eigen::VectorXd dual_volumes;  // n, sums to meshed area

  int n() const { return static_cast<int>(C.size()); }
};

FemMatrices assemble_fem(const TriMesh& mesh);

// L = kappa2 * C + G
SparseMat spde_operator(const FemMatrices& fem, double kappa2);

// Q = L C^{-1} L, symmetric positive definite for kappa2 > 0.
SparseMat precision_matrix(const FemMatrices& fem, double kappa2);

}  // namespace lgcp
