// Serial vs OpenMP comparison of the data-parallel scoring kernels.
#include <benchmark/benchmark.h>

#include "lgcpsynth/data_io.hpp"
#include "lgcpsynth/gmrf.hpp"
#include "lgcpsynth/risk.hpp"
#include "lgcpsynth/synthesis.hpp"
#include "lgcpsynth/utility.hpp"

using namespace lgcp;

namespace {

struct Fixture {
  Rect domain{0, 0, 100, 100};
  TriMesh mesh = build_mesh(domain, 10.0, 10.0);
  FemMatrices fem = assemble_fem(mesh);
  CovariatePtr covs;
  PointPattern pattern, synthetic;
  PosteriorChain chain, chain_synth;
  JointChain joint;

  Fixture() {
    auto c = std::make_shared<CovariateSet>();
    const RasterSpec spec = RasterSpec::covering(mesh.extent, 10.0);
    c->log_pd = constant_field(spec, 0.0);
    c->covariates.push_back(distance_covariate({40, 60}, spec));
    covs = c;

    SpdePrecision spde(fem, 8.0 / (30.0 * 30.0));
    Rng rng(7);
    IntensityField truth;
    truth.beta = Eigen::VectorXd::Zero(2);
    truth.beta[1] = -0.5;
    truth.w = spde.sample(0.5 * 4 * M_PI * 8.0 / 900.0, rng);
    truth.covs = covs;
    pattern = sample_pattern(truth, 200, 50.0, mesh, domain, 11);
    synthetic = radial_synthesize(pattern, 5.0, 12);

    // synthetic chains with plausible dispersion, heavy fits are not the
    // benchmarked kernel
    const int L = 400;
    chain.meta.mesh_hash = mesh_hash(mesh);
    chain.meta.prior = PriorConfig{};
    for (int l = 0; l < L; ++l) {
      ChainState s;
      s.beta = truth.beta + 0.05 * Eigen::VectorXd::NullaryExpr(2, [&](int) {
                 return rng.normal();
               });
      s.w = (truth.w + 0.1 * spde.sample(1.0, rng)).cast<float>();
      s.th1 = 0.1 * rng.normal();
      s.th2 = 0.1 * rng.normal();
      chain.samples.push_back(std::move(s));
    }
    chain_synth = chain;
    joint.meta = chain.meta;
    joint.mechanism = SynthMechanism::prs;
    for (const auto& s : chain.samples) {
      JointState js;
      js.beta = s.beta;
      js.w = s.w;
      js.synth = s.w;
      js.th1 = s.th1;
      js.th2 = s.th2;
      joint.samples.push_back(std::move(js));
    }
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

RiskConfig risk_config() {
  RiskConfig cfg;
  cfg.r = 5.0;
  cfg.M_quad = 900;
  cfg.sample_stride = 1;
  return cfg;
}

void BM_risk_joint_serial(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto report = max_disclosure_risk_joint(f.joint, f.pattern, f.mesh, f.fem,
                                            f.covs, risk_config(), false);
    benchmark::DoNotOptimize(report.max_risk);
  }
}

void BM_risk_joint_omp(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto report = max_disclosure_risk_joint(f.joint, f.pattern, f.mesh, f.fem,
                                            f.covs, risk_config(), true);
    benchmark::DoNotOptimize(report.max_risk);
  }
}

void BM_risk_radial_serial(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto report = max_disclosure_risk_radial(f.chain, f.pattern, f.synthetic, 5.0,
                                             f.mesh, f.fem, f.covs, risk_config(),
                                             false);
    benchmark::DoNotOptimize(report.max_risk);
  }
}

void BM_risk_radial_omp(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto report = max_disclosure_risk_radial(f.chain, f.pattern, f.synthetic, 5.0,
                                             f.mesh, f.fem, f.covs, risk_config(),
                                             true);
    benchmark::DoNotOptimize(report.max_risk);
  }
}

void BM_pmse_serial(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto report = pmse(f.chain, f.chain_synth, f.pattern, f.synthetic, f.mesh,
                       f.fem, f.covs, false);
    benchmark::DoNotOptimize(report.pmse);
  }
}

void BM_pmse_omp(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto report = pmse(f.chain, f.chain_synth, f.pattern, f.synthetic, f.mesh,
                       f.fem, f.covs, true);
    benchmark::DoNotOptimize(report.pmse);
  }
}

void BM_kde_serial(benchmark::State& state) {
  auto& f = fixture();
  WeightedPoints pop{f.pattern.points, std::vector<double>(f.pattern.n(), 1.0)};
  const RasterSpec spec = RasterSpec::covering(f.mesh.extent, 1.0);
  for (auto _ : state) {
    auto field = population_kde(pop, 8.0, spec, 1000.0, false);
    benchmark::DoNotOptimize(field.values(0, 0));
  }
}

void BM_kde_omp(benchmark::State& state) {
  auto& f = fixture();
  WeightedPoints pop{f.pattern.points, std::vector<double>(f.pattern.n(), 1.0)};
  const RasterSpec spec = RasterSpec::covering(f.mesh.extent, 1.0);
  for (auto _ : state) {
    auto field = population_kde(pop, 8.0, spec, 1000.0, true);
    benchmark::DoNotOptimize(field.values(0, 0));
  }
}

BENCHMARK(BM_risk_joint_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_risk_joint_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_risk_radial_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_risk_radial_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pmse_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pmse_omp)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_kde_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_kde_omp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
