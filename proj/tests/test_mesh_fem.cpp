#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include "lgcpsynth/fem.hpp"
#include "lgcpsynth/gmrf.hpp"
#include "lgcpsynth/mesh.hpp"
#include "lgcpsynth/rng.hpp"
#include "oracle_helpers.hpp"

using namespace lgcp;

TEST_CASE("build_mesh vertex and triangle counts") {
  const Rect unit{0, 0, 1, 1};
  auto m1 = build_mesh(unit, 1.0, 0.0);
  CHECK(m1.n() == 4);
  CHECK(m1.triangles.size() == 2);

  auto m2 = build_mesh(unit, 0.5, 0.0);
  CHECK(m2.n() == 9);
  CHECK(m2.triangles.size() == 8);

  auto m3 = build_mesh(Rect{200, 200, 2200, 2200}, 100.0, 200.0);
  CHECK(m3.n() == 625);  // ((2400 - 0)/100 + 1)^2
  CHECK(m3.nx == 25);
  CHECK(m3.extent.xmin == doctest::Approx(0.0));
  CHECK(m3.extent.xmax == doctest::Approx(2400.0));
}

TEST_CASE("build_mesh rejects bad input") {
  CHECK_THROWS_AS(build_mesh(Rect{0, 0, 0, 1}, 0.5, 0.0), ConfigError);
  CHECK_THROWS_AS(build_mesh(Rect{0, 0, 1, 1}, 0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(build_mesh(Rect{0, 0, 1, 1}, 0.5, -1.0), ConfigError);
}

TEST_CASE("triangles are non-degenerate, non-overlapping, and cover the extent") {
  auto mesh = build_mesh(Rect{0, 0, 3, 2}, 0.5, 0.25);
  double total = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    CHECK(mesh.triangle_area(static_cast<int>(t)) > 0.0);
    total += mesh.triangle_area(static_cast<int>(t));
  }
  CHECK(total == doctest::Approx(mesh.extent.area()).epsilon(1e-12));
}

TEST_CASE("basis_eval at vertices, centroids, and edge midpoints") {
  auto mesh = build_mesh(Rect{0, 0, 2, 2}, 1.0, 0.0);

  for (int i : {0, 4, 8}) {
    auto b = basis_eval(mesh, mesh.vertices[i]);
    double at_i = 0.0, sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      sum += b.weight[k];
      if (b.index[k] == i) at_i += b.weight[k];
    }
    CHECK(at_i == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  }

  const auto& tri = mesh.triangles[0];
  Point centroid{(mesh.vertices[tri[0]].x + mesh.vertices[tri[1]].x + mesh.vertices[tri[2]].x) / 3.0,
                 (mesh.vertices[tri[0]].y + mesh.vertices[tri[1]].y + mesh.vertices[tri[2]].y) / 3.0};
  auto bc = basis_eval(mesh, centroid);
  for (int k = 0; k < 3; ++k) CHECK(bc.weight[k] == doctest::Approx(1.0 / 3).epsilon(1e-12));

  // midpoint of the shared diagonal edge of cell 0: vertices 0 and 4 on a 3x3 grid
  Point mid{0.5, 0.5};
  auto bm = basis_eval(mesh, mid);
  double w0 = 0.0, w4 = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (bm.index[k] == 0) w0 += bm.weight[k];
    if (bm.index[k] == 4) w4 += bm.weight[k];
  }
  CHECK(w0 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w4 == doctest::Approx(0.5).epsilon(1e-12));
  // tie on the diagonal resolves to the lowest triangle index
  CHECK(bm.triangle == 0);
}

TEST_CASE("basis_eval rejects out-of-extent points") {
  auto mesh = build_mesh(Rect{0, 0, 1, 1}, 0.5, 0.0);
  CHECK_THROWS_AS(basis_eval(mesh, Point{1.5, 0.5}), OutOfDomainError);
}

TEST_CASE("partition of unity at 1000 random interior points") {
  auto mesh = build_mesh(Rect{0, 0, 3, 2}, 0.37, 0.1);
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    Point p{rng.uniform(0, 3), rng.uniform(0, 2)};
    auto b = basis_eval(mesh, p);
    const double sum = b.weight[0] + b.weight[1] + b.weight[2];
    REQUIRE(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("assemble_fem on the two-triangle unit square matches hand assembly") {
  auto mesh = build_mesh(Rect{0, 0, 1, 1}, 1.0, 0.0);
  auto fem = assemble_fem(mesh);
  // vertices 0 and 3 sit on the diagonal and touch both triangles
  CHECK(fem.C[0] == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(fem.C[1] == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK(fem.C[2] == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK(fem.C[3] == doctest::Approx(1.0 / 3).epsilon(1e-14));

  auto dense = oracle::dense_assemble(mesh);
  for (int i = 0; i < 4; ++i) {
    CHECK(fem.C[i] == doctest::Approx(dense.C(i, i)).epsilon(1e-12));
    for (int j = 0; j < 4; ++j)
      CHECK(fem.G.coeff(i, j) == doctest::Approx(dense.G(i, j)).epsilon(1e-12));
  }
}

TEST_CASE("mass, stiffness, and dual volumes invariants on a generic mesh") {
  auto mesh = build_mesh(Rect{200, 200, 2200, 2200}, 250.0, 100.0);
  auto fem = assemble_fem(mesh);

  CHECK(fem.C.sum() == doctest::Approx(mesh.extent.area()).epsilon(1e-9));
  CHECK(fem.dual_volumes.sum() == doctest::Approx(mesh.extent.area()).epsilon(1e-9));
  CHECK(fem.dual_volumes.minCoeff() > 0.0);
  CHECK(fem.C.minCoeff() > 0.0);

  const Eigen::VectorXd row_sums = fem.G * Eigen::VectorXd::Ones(mesh.n());
  CHECK(row_sums.cwiseAbs().maxCoeff() < 1e-9);

  Eigen::MatrixXd Gd = Eigen::MatrixXd(fem.G);
  CHECK((Gd - Gd.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("refinement keeps the lumped mass total exact") {
  const Rect dom{0, 0, 4, 3};
  auto coarse = assemble_fem(build_mesh(dom, 0.5, 0.0));
  auto fine = assemble_fem(build_mesh(dom, 0.25, 0.0));
  CHECK(coarse.C.sum() == doctest::Approx(fine.C.sum()).epsilon(1e-9));
}

TEST_CASE("assemble_fem names the degenerate triangle") {
  auto mesh = build_mesh(Rect{0, 0, 1, 1}, 1.0, 0.0);
  mesh.vertices[1] = mesh.vertices[0];  // collapse triangle 0
  try {
    assemble_fem(mesh);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("triangle 0") != std::string::npos);
  }
}

TEST_CASE("precision_matrix matches the dense oracle and is SPD") {
  auto mesh = build_mesh(Rect{0, 0, 1, 1}, 1.0, 0.0);
  auto fem = assemble_fem(mesh);
  auto Q = precision_matrix(fem, 1.0);

  auto dense = oracle::dense_assemble(mesh);
  const Eigen::MatrixXd L = dense.C + dense.G;
  const Eigen::MatrixXd Qd = L * dense.C.inverse() * L;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(Q.coeff(i, j) == doctest::Approx(Qd(i, j)).epsilon(1e-12));

  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const double sx = rng.uniform(0.3, 3.0), sy = rng.uniform(0.3, 3.0);
    auto m = build_mesh(Rect{0, 0, sx, sy}, rng.uniform(0.15, 0.6), rng.uniform(0, 0.3));
    auto f = assemble_fem(m);
    auto Qs = precision_matrix(f, rng.uniform(0.01, 10.0));
    const Eigen::MatrixXd Qdense(Qs);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Qdense);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("precision_matrix scales as kappa^4 on the identity-mass stub") {
  FemMatrices stub;
  stub.C = Eigen::VectorXd::Ones(5);
  stub.G = SparseMat(5, 5);  // zero stiffness
  stub.dual_volumes = stub.C;
  auto Q1 = precision_matrix(stub, 1.0);
  auto Q2 = precision_matrix(stub, 2.0);
  for (int i = 0; i < 5; ++i) {
    CHECK(Q1.coeff(i, i) == doctest::Approx(1.0));
    CHECK(Q2.coeff(i, i) == doctest::Approx(4.0));
  }
  CHECK_THROWS_AS(precision_matrix(stub, 0.0), ConfigError);
  CHECK_THROWS_AS(precision_matrix(stub, -1.0), ConfigError);
}

TEST_CASE("GMRF sampling matches the dense marginal variances") {
  auto mesh = build_mesh(Rect{0, 0, 3, 3}, 0.5, 0.0);  // 49 vertices
  auto fem = assemble_fem(mesh);
  const double kappa2 = 2.0, xi2 = 1.7;
  SpdePrecision spde(fem, kappa2);

  const Eigen::MatrixXd Qd = Eigen::MatrixXd(precision_matrix(fem, kappa2));
  const Eigen::VectorXd marginal_var = xi2 * Qd.inverse().diagonal();

  Rng rng(99);
  const int draws = 10000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(mesh.n());
  Eigen::VectorXd sum2 = Eigen::VectorXd::Zero(mesh.n());
  for (int s = 0; s < draws; ++s) {
    const Eigen::VectorXd x = spde.sample(xi2, rng);
    sum += x;
    sum2 += x.cwiseProduct(x);
  }
  const Eigen::VectorXd emp_var = sum2 / draws - (sum / draws).cwiseAbs2();
  for (int i = 0; i < mesh.n(); ++i)
    CHECK(emp_var[i] == doctest::Approx(marginal_var[i]).epsilon(0.10));
}

TEST_CASE("GMRF log density matches the dense oracle") {
  auto mesh = build_mesh(Rect{0, 0, 2, 2}, 0.4, 0.0);  // 36 vertices
  auto fem = assemble_fem(mesh);
  const double kappa2 = 1.3, xi2 = 0.8;
  SpdePrecision spde(fem, kappa2);
  Rng rng(5);
  const Eigen::VectorXd w = spde.sample(xi2, rng);
  const Eigen::MatrixXd Qd = Eigen::MatrixXd(precision_matrix(fem, kappa2));
  const double expected = oracle::dense_mvn_logpdf_precision(w, Qd, xi2);
  CHECK(spde.log_density(w, xi2) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("mesh JSON round trip preserves the mesh and its hash") {
  auto mesh = build_mesh(Rect{200, 200, 2200, 2200}, 400.0, 200.0);
  const auto path = std::filesystem::temp_directory_path() / "lgcpsynth_mesh_test.json";
  save_mesh_json(mesh, path);
  auto back = load_mesh_json(path);
  CHECK(mesh_hash(back) == mesh_hash(mesh));
  std::filesystem::remove(path);
}
