// Regenerates the bundled case-study data under data/.
//
// The Soho bundle is a reconstruction at the scale of John Snow's 1854
// cholera survey: 578 case locations on [200 m, 2200 m]^2 drawn from a
// ground-truth intensity with a negative distance-to-pump effect, a
// 13-pump registry (pump 7 is the outbreak source), and a synthetic
// household register driving the population offset. It is a statistical
// stand-in with the survey's headline numbers, not the historical record.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "lgcpsynth/data_io.hpp"
#include "lgcpsynth/gmrf.hpp"
#include "lgcpsynth/synthesis.hpp"

namespace fs = std::filesystem;
using namespace lgcp;

namespace {

void write_pumps(const fs::path& path) {
  // Pump 7 (row 7 of 13) is the Broad St. pump used as the covariate anchor.
  const Point pumps[13] = {
      {420, 1880}, {760, 2040}, {1400, 2110}, {1960, 1830}, {580, 1350},
      {900, 960},  {1230, 1200}, {1700, 1380}, {2050, 1050}, {480, 560},
      {1020, 420}, {1540, 640},  {1930, 360}};
  std::ofstream out(path);
  out << "x,y\n";
  for (const Point& p : pumps) out << p.x << ',' << p.y << "\n";
}

void write_population(const fs::path& path, Rng& rng) {
  // Household register: a jittered grid over the built-up area with heavier
  // weights toward the center.
  std::ofstream out(path);
  out << "x,y,w\n";
  for (int iy = 0; iy < 16; ++iy) {
    for (int ix = 0; ix < 16; ++ix) {
      const double x = 320 + ix * 112.0 + rng.uniform(-35, 35);
      const double y = 320 + iy * 112.0 + rng.uniform(-35, 35);
      const double cx = (x - 1200) / 1000.0, cy = (y - 1200) / 1000.0;
      const double weight = 1.0 + 1.4 * std::exp(-(cx * cx + cy * cy)) +
                            0.25 * rng.uniform01();
      out << x << ',' << y << ',' << weight << "\n";
    }
  }
}

void make_soho(const fs::path& dir) {
  fs::create_directories(dir);
  Rng rng(20250811);

  write_pumps(dir / "pumps.csv");
  write_population(dir / "population.csv", rng);

  const Rect domain{200, 200, 2200, 2200};
  const TriMesh mesh = build_mesh(domain, 100.0, 200.0);
  const FemMatrices fem = assemble_fem(mesh);
  const RasterSpec spec = RasterSpec::covering(mesh.extent, 100.0);

  auto covs = std::make_shared<CovariateSet>();
  const WeightedPoints pop = load_weighted_points(dir / "population.csv");
  covs->log_pd = log_field(population_kde(pop, 150.0, spec, 21345.0));
  const Point broad_st{1230, 1200};
  covs->covariates.push_back(distance_covariate(broad_st, spec));

  // Ground truth: beta1 = -1.2 per sd of distance, plus a Matern field with
  // an effective range of ~350 m and marginal variance ~0.5.
  const Hyperparams hp = [] {
    Hyperparams h;
    const double rho = 350.0, sigma2 = 0.5;
    h.kappa2 = 8.0 / (rho * rho);
    h.xi2 = sigma2 * 4.0 * M_PI * h.kappa2;
    return h;
  }();
  SpdePrecision spde(fem, hp.kappa2);

  IntensityField truth;
  truth.beta = Eigen::VectorXd::Zero(2);
  truth.beta[0] = 0.0;  // absolute scale is irrelevant to weighted sampling
  truth.beta[1] = -1.2;
  truth.w = spde.sample(hp.xi2, rng);
  truth.covs = covs;

  const PointPattern deaths = sample_pattern(truth, 578, 200.0, mesh, domain,
                                             rng.next_u64());
  save_points_csv(deaths, dir / "deaths.csv");
  std::cout << "soho: wrote " << deaths.n() << " case locations\n";
}

void make_toy(const fs::path& dir) {
  fs::create_directories(dir);
  Rng rng(42);
  const Rect domain{0, 0, 10, 10};
  const TriMesh mesh = build_mesh(domain, 5.0, 0.0);  // 3x3 knots
  const FemMatrices fem = assemble_fem(mesh);
  const RasterSpec spec = RasterSpec::covering(mesh.extent, 0.5);

  auto covs = std::make_shared<CovariateSet>();
  covs->log_pd = constant_field(spec, 0.0);
  covs->covariates.push_back(distance_covariate({3.0, 4.0}, spec));

  IntensityField truth;
  truth.beta = Eigen::VectorXd::Zero(2);
  truth.beta[1] = -0.8;
  truth.w = Eigen::VectorXd::Zero(mesh.n());
  truth.covs = covs;
  (void)fem;

  const PointPattern pts = sample_pattern(truth, 50, 100.0, mesh, domain,
                                          rng.next_u64());
  save_points_csv(pts, dir / "points.csv");
  std::cout << "toy: wrote " << pts.n() << " locations\n";
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? argv[1] : ".";
  make_soho(root / "data" / "snow");
  make_toy(root / "data" / "toy");
  return 0;
}
