#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lgcpsynth/data_io.hpp"
#include "lgcpsynth/gmrf.hpp"
#include "lgcpsynth/synthesis.hpp"
#include "lgcpsynth/utility.hpp"
#include "oracle_helpers.hpp"

using namespace lgcp;

namespace {

struct Setup {
  Rect domain{0, 0, 4, 4};
  TriMesh mesh = build_mesh(domain, 0.5, 0.0);
  FemMatrices fem = assemble_fem(mesh);
  CovariatePtr covs;

  Setup() {
    auto c = std::make_shared<CovariateSet>();
    c->log_pd = constant_field(RasterSpec::covering(mesh.extent, 0.5), 0.0);
    covs = c;
  }

  IntensityField field_with(double beta0, const Eigen::VectorXd& w) const {
    IntensityField f;
    f.beta = Eigen::VectorXd::Constant(1, beta0);
    f.w = w;
    f.covs = covs;
    return f;
  }

  PosteriorChain chain_around(const Eigen::VectorXd& center, double jitter, int L,
                              uint64_t seed) const {
    PosteriorChain chain;
    chain.meta.mesh_hash = mesh_hash(mesh);
    Rng rng(seed);
    for (int l = 0; l < L; ++l) {
      ChainState s;
      s.beta = Eigen::VectorXd::Constant(1, 0.05 * rng.normal());
      s.w = (center + jitter * Eigen::VectorXd::NullaryExpr(
                                   mesh.n(), [&](int) { return rng.normal(); }))
                .cast<float>();
      chain.samples.push_back(std::move(s));
    }
    return chain;
  }
};

}  // namespace

TEST_CASE("classification_prob: symmetric and saturated cases") {
  Setup s;
  Rng rng(2);
  Eigen::VectorXd w =
      Eigen::VectorXd::NullaryExpr(s.mesh.n(), [&](int) { return rng.normal(); });
  const IntensityField f = s.field_with(0.3, w);

  for (int t = 0; t < 20; ++t) {
    const Point y{rng.uniform(0, 4), rng.uniform(0, 4)};
    CHECK(classification_prob(f, f, y, s.mesh, s.fem) == doctest::Approx(0.5).epsilon(1e-14));
  }

  // synthetic intensity numerically zero at y: log ratio beyond 50
  Eigen::VectorXd sunk = w;
  for (int i = 0; i < s.mesh.n(); ++i)
    if (s.mesh.vertices[i].x < 2.0) sunk[i] -= 200.0;
  const IntensityField g = s.field_with(0.3, sunk);
  const double p = classification_prob(f, g, {0.5, 2.0}, s.mesh, s.fem);
  CHECK(1.0 - p < 1e-20);
}

TEST_CASE("classification_prob matches a direct evaluation of the formula") {
  Setup s;
  Rng rng(3);
  const IntensityField a = s.field_with(
      0.2, Eigen::VectorXd::NullaryExpr(s.mesh.n(), [&](int) { return rng.normal(); }));
  const IntensityField b = s.field_with(
      -0.4, Eigen::VectorXd::NullaryExpr(s.mesh.n(), [&](int) { return rng.normal(); }));
  const double I_a = integrate_intensity(a, s.mesh, s.fem);
  const double I_b = integrate_intensity(b, s.mesh, s.fem);
  for (int t = 0; t < 50; ++t) {
    const Point y{rng.uniform(0, 4), rng.uniform(0, 4)};
    const double lam = std::exp(log_intensity_at(a, s.mesh, y));
    const double lam_d = std::exp(log_intensity_at(b, s.mesh, y));
    const double direct = lam / (lam + (I_a / I_b) * lam_d);
    CHECK(classification_prob(a, b, y, s.mesh, s.fem) ==
          doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("expected_correct closed forms") {
  CHECK(expected_correct({0.5, 0.5, 0.5}, 0) == doctest::Approx(0.5));
  CHECK(expected_correct({0.5, 0.5, 0.5}, 1) == doctest::Approx(0.5));
  CHECK(expected_correct({1.0, 1.0}, 1) == doctest::Approx(1.0));
  CHECK(expected_correct({0.2, 0.5, 0.8}, 0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(expected_correct({}, 1), ConfigError);
  CHECK_THROWS_AS(expected_correct({0.5}, 2), ConfigError);
}

TEST_CASE("pmse: identical chains and same-surface patterns score near zero") {
  Setup s;
  Rng rng(7);
  SpdePrecision spde(s.fem, 2.0);
  const Eigen::VectorXd center = spde.sample(6.0, rng);
  const auto chain = s.chain_around(center, 0.2, 1000, 5);

  const IntensityField surface = s.field_with(1.0, center);
  const PointPattern S = sample_pattern(surface, 120, 100.0, s.mesh, s.domain, 11);
  const PointPattern Sd = sample_pattern(surface, 120, 100.0, s.mesh, s.domain, 12);

  const auto report = pmse(chain, chain, S, Sd, s.mesh, s.fem, s.covs);
  CHECK(report.pmse < 0.01);
  CHECK(report.L == 1000);
  for (double p : report.per_point_phat) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("pmse: disjoint supports approach the worst case 0.25") {
  Setup s;
  Eigen::VectorXd left = Eigen::VectorXd::Zero(s.mesh.n());
  Eigen::VectorXd right = Eigen::VectorXd::Zero(s.mesh.n());
  for (int i = 0; i < s.mesh.n(); ++i) {
    if (s.mesh.vertices[i].x >= 2.0) left[i] = -200.0;
    if (s.mesh.vertices[i].x < 2.0) right[i] = -200.0;
  }
  const auto chain_left = s.chain_around(left, 0.05, 200, 21);
  const auto chain_right = s.chain_around(right, 0.05, 200, 22);

  PointPattern S, Sd;
  S.domain = Sd.domain = s.domain;
  Rng rng(9);
  for (int i = 0; i < 60; ++i) {
    S.points.push_back({rng.uniform(0.05, 1.45), rng.uniform(0.05, 3.95)});
    Sd.points.push_back({rng.uniform(2.55, 3.95), rng.uniform(0.05, 3.95)});
  }
  const auto report = pmse(chain_left, chain_right, S, Sd, s.mesh, s.fem, s.covs);
  CHECK(report.pmse > 0.24);
  CHECK(report.pmse <= 0.25);
}

TEST_CASE("pmse is symmetric under exchanging the release roles") {
  Setup s;
  Rng rng(31);
  const auto chain_a = s.chain_around(
      Eigen::VectorXd::NullaryExpr(s.mesh.n(), [&](int) { return rng.normal(); }), 0.3,
      150, 41);
  const auto chain_b = s.chain_around(
      Eigen::VectorXd::NullaryExpr(s.mesh.n(), [&](int) { return rng.normal(); }), 0.3,
      150, 42);
  PointPattern A, B;
  A.domain = B.domain = s.domain;
  for (int i = 0; i < 40; ++i) {
    A.points.push_back({rng.uniform(0.1, 3.9), rng.uniform(0.1, 3.9)});
    B.points.push_back({rng.uniform(0.1, 3.9), rng.uniform(0.1, 3.9)});
  }
  const auto ab = pmse(chain_a, chain_b, A, B, s.mesh, s.fem, s.covs);
  const auto ba = pmse(chain_b, chain_a, B, A, s.mesh, s.fem, s.covs);
  CHECK(std::abs(ab.pmse - ba.pmse) < 1e-12);
}

TEST_CASE("pmse truncates unequal chains and validates inputs") {
  Setup s;
  Rng rng(51);
  const Eigen::VectorXd c =
      Eigen::VectorXd::NullaryExpr(s.mesh.n(), [&](int) { return rng.normal(); });
  const auto chain_long = s.chain_around(c, 0.2, 120, 61);
  auto chain_short = chain_long;
  chain_short.samples.resize(70);

  PointPattern A, B;
  A.domain = B.domain = s.domain;
  for (int i = 0; i < 10; ++i) {
    A.points.push_back({rng.uniform(0.1, 3.9), rng.uniform(0.1, 3.9)});
    B.points.push_back({rng.uniform(0.1, 3.9), rng.uniform(0.1, 3.9)});
  }
  const auto report = pmse(chain_long, chain_short, A, B, s.mesh, s.fem, s.covs);
  CHECK(report.L == 70);

  PointPattern mismatched = B;
  mismatched.points.pop_back();
  CHECK_THROWS_AS(pmse(chain_long, chain_short, A, mismatched, s.mesh, s.fem, s.covs),
                  ConfigError);
  auto foreign = chain_short;
  foreign.meta.mesh_hash ^= 1;
  CHECK_THROWS_AS(pmse(chain_long, foreign, A, B, s.mesh, s.fem, s.covs), ConfigError);
}

TEST_CASE("pmse Monte Carlo stability when doubling the chain length") {
  Setup s;
  Rng rng(71);
  SpdePrecision spde(s.fem, 2.0);
  const Eigen::VectorXd ca = spde.sample(4.0, rng);
  const Eigen::VectorXd cb = spde.sample(4.0, rng);
  const int L = 300;
  const auto chain_a = s.chain_around(ca, 0.35, 2 * L, 81);
  const auto chain_b = s.chain_around(cb, 0.35, 2 * L, 82);

  PointPattern A, B;
  A.domain = B.domain = s.domain;
  for (int i = 0; i < 30; ++i) {
    A.points.push_back({rng.uniform(0.1, 3.9), rng.uniform(0.1, 3.9)});
    B.points.push_back({rng.uniform(0.1, 3.9), rng.uniform(0.1, 3.9)});
  }

  auto chain_a_half = chain_a;
  chain_a_half.samples.resize(L);
  auto chain_b_half = chain_b;
  chain_b_half.samples.resize(L);
  const double pmse_half = pmse(chain_a_half, chain_b_half, A, B, s.mesh, s.fem, s.covs).pmse;
  const double pmse_full = pmse(chain_a, chain_b, A, B, s.mesh, s.fem, s.covs).pmse;

  // bootstrap the half-sample pMSE over chain indices
  const int total = 2 * A.n();
  Eigen::MatrixXd p_mat(total, L);
  for (int k = 0; k < total; ++k) {
    const bool conf = k < A.n();
    const Point y = conf ? A.points[k] : B.points[k - A.n()];
    for (int l = 0; l < L; ++l) {
      IntensityField fa = s.field_with(chain_a.samples[l].beta[0],
                                       chain_a.samples[l].w.cast<double>());
      IntensityField fb = s.field_with(chain_b.samples[l].beta[0],
                                       chain_b.samples[l].w.cast<double>());
      const double p = classification_prob(fa, fb, y, s.mesh, s.fem);
      p_mat(k, l) = conf ? p : 1.0 - p;
    }
  }
  Rng boot(99);
  std::vector<double> replicates;
  for (int b = 0; b < 200; ++b) {
    double acc = 0.0;
    std::vector<int> idx(L);
    for (int l = 0; l < L; ++l) idx[l] = static_cast<int>(boot.below(L));
    for (int k = 0; k < total; ++k) {
      double phat = 0.0;
      for (int l : idx) phat += p_mat(k, l);
      phat /= L;
      acc += (phat - 0.5) * (phat - 0.5);
    }
    replicates.push_back(acc / total);
  }
  const double se = std::sqrt(oracle::variance(replicates));
  CHECK(std::abs(pmse_full - pmse_half) < 2.0 * se);
}

TEST_CASE("parallel and serial pMSE agree bitwise") {
  Setup s;
  Rng rng(91);
  const auto chain_a = s.chain_around(
      Eigen::VectorXd::NullaryExpr(s.mesh.n(), [&](int) { return rng.normal(); }), 0.3,
      100, 101);
  const auto chain_b = s.chain_around(
      Eigen::VectorXd::NullaryExpr(s.mesh.n(), [&](int) { return rng.normal(); }), 0.3,
      100, 102);
  PointPattern A, B;
  A.domain = B.domain = s.domain;
  for (int i = 0; i < 25; ++i) {
    A.points.push_back({rng.uniform(0.1, 3.9), rng.uniform(0.1, 3.9)});
    B.points.push_back({rng.uniform(0.1, 3.9), rng.uniform(0.1, 3.9)});
  }
  const auto serial = pmse(chain_a, chain_b, A, B, s.mesh, s.fem, s.covs, false);
  const auto parallel = pmse(chain_a, chain_b, A, B, s.mesh, s.fem, s.covs, true);
  CHECK(serial.pmse == parallel.pmse);
  for (size_t k = 0; k < serial.per_point_phat.size(); ++k)
    CHECK(serial.per_point_phat[k] == parallel.per_point_phat[k]);
}
