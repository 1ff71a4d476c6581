#include "lgcpsynth/risk.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace lgcp {

void RiskConfig::validate() const {
  if (!(r > 0.0)) throw ConfigError("risk: radius must be > 0");
  const int m = static_cast<int>(std::lround(std::sqrt(double(M_quad))));
  if (M_quad < 4 || m * m != M_quad)
    throw ConfigError("risk: M_quad must be a perfect square >= 4");
  if (norm_refine < 0 || norm_refine > 8)
    throw ConfigError("risk: norm_refine must be in [0, 8]");
  if (sample_stride < 1) throw ConfigError("risk: sample_stride must be >= 1");
}

namespace {

// Strided view over the states of either chain type.
struct ChainView {
  std::vector<const ChainState*> states;

  int L() const { return static_cast<int>(states.size()); }
};

ChainView view_of(const PosteriorChain& chain, int stride) {
  if (chain.samples.empty()) throw ConfigError("risk: empty chain");
  ChainView v;
  for (size_t i = 0; i < chain.samples.size(); i += stride)
    v.states.push_back(&chain.samples[i]);
  return v;
}

ChainView view_of(const JointChain& chain, int stride) {
  if (chain.samples.empty()) throw ConfigError("risk: empty chain");
  ChainView v;
  for (size_t i = 0; i < chain.samples.size(); i += stride)
    v.states.push_back(&chain.samples[i]);
  return v;
}

double log_lambda_at(const ChainState& s, const LocalEval& q) {
  double eta = 0.0;
  for (int i = 0; i < 3; ++i)
    eta += q.basis.weight[i] * static_cast<double>(s.w[q.basis.index[i]]);
  return q.base + q.x.dot(s.beta) + eta;
}

// Per-sample log intensity integrals over the meshed region.
std::vector<double> log_integrals(const ChainView& chain, const NodeCache& node) {
  std::vector<double> out(chain.L());
  for (int l = 0; l < chain.L(); ++l) {
    const ChainState& s = *chain.states[l];
    out[l] = log_integral_cached(node, s.beta, s.w.cast<double>());
    if (!std::isfinite(out[l]))
      throw NumericError("risk: non-finite intensity integral in chain sample");
  }
  return out;
}

// d(query) = [ (1/L) sum_l exp(log_num_l - log lambda_l(query)) ]^{-1},
// evaluated in log space.
double loo_density_core(const ChainView& chain, const std::vector<double>& log_num,
                        const LocalEval& q, std::vector<double>& scratch) {
  const int L = chain.L();
  scratch.resize(L);
  double m = -std::numeric_limits<double>::infinity();
  for (int l = 0; l < L; ++l) {
    scratch[l] = log_num[l] - log_lambda_at(*chain.states[l], q);
    m = std::max(m, scratch[l]);
  }
  if (!std::isfinite(m)) throw NumericError("risk: non-finite CPO ratio");
  double sum = 0.0;
  for (int l = 0; l < L; ++l) sum += std::exp(scratch[l] - m);
  const double log_mean = m + std::log(sum) - std::log(double(L));
  return std::exp(-log_mean);
}

// Quadrature geometry of one disk, restricted to the domain.
struct DiskQuad {
  std::vector<Point> pts;
  std::vector<double> weight;
};

DiskQuad disk_quadrature_points(Point center, double r, int M, const Rect& domain) {
  const int m = static_cast<int>(std::lround(std::sqrt(double(M))));
  if (M < 4 || m * m != M)
    throw ConfigError("disk quadrature: M must be a perfect square >= 4");
  DiskQuad out;
  const double step = 2.0 / m;
  const double cell_area = step * step;
  for (int j = 0; j < m; ++j) {
    const double yt = -1.0 + (j + 0.5) * step;
    const double y = r * yt + center.y;
    const double g = std::sqrt(std::max(0.0, r * r - (y - center.y) * (y - center.y)));
    if (g == 0.0) continue;
    for (int i = 0; i < m; ++i) {
      const double xt = -1.0 + (i + 0.5) * step;
      const Point p{g * xt + center.x, y};
      if (!domain.contains(p)) continue;  // integrand is 0 outside Omega
      out.pts.push_back(p);
      out.weight.push_back(r * g * cell_area);
    }
  }
  return out;
}

// Midpoint lattice over the domain used to normalize joint-mechanism
// densities; cell side = mesh spacing / 2^refine.
struct Lattice {
  std::vector<Point> pts;
  double cell_area = 0.0;
};

Lattice domain_lattice(const Rect& domain, double base_cell, int refine) {
  Lattice lat;
  const double cell = base_cell / double(1 << refine);
  const int nx = std::max(1, static_cast<int>(std::ceil(domain.width() / cell - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(domain.height() / cell - 1e-9)));
  const double hx = domain.width() / nx, hy = domain.height() / ny;
  lat.cell_area = hx * hy;
  lat.pts.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      lat.pts.push_back({domain.xmin + (i + 0.5) * hx, domain.ymin + (j + 0.5) * hy});
  return lat;
}

bool ball_covers_domain(Point c, double r, const Rect& d) {
  const Point corners[4] = {{d.xmin, d.ymin}, {d.xmax, d.ymin}, {d.xmin, d.ymax}, {d.xmax, d.ymax}};
  for (const Point& p : corners)
    if (dist(c, p) > r) return false;
  return true;
}

// Per-sample disk integrals of the intensity over B_r(center) ∩ Omega.
std::vector<double> log_disk_integrals(const ChainView& chain, const TriMesh& mesh,
                                       const CovariateSet& covs, Point center,
                                       double r, int M, const Rect& domain) {
  const DiskQuad quad = disk_quadrature_points(center, r, M, domain);
  std::vector<LocalEval> evals;
  evals.reserve(quad.pts.size());
  for (const Point& p : quad.pts) evals.push_back(local_eval(mesh, covs, p));

  std::vector<double> out(chain.L());
  for (int l = 0; l < chain.L(); ++l) {
    const ChainState& s = *chain.states[l];
    double sum = 0.0;
    for (size_t i = 0; i < evals.size(); ++i)
      sum += quad.weight[i] * std::exp(log_lambda_at(s, evals[i]));
    if (!(sum > 0.0) || !std::isfinite(sum))
      throw NumericError("risk: degenerate disk integral");
    out[l] = std::log(sum);
  }
  return out;
}

RiskReport finalize_report(std::vector<double> risks, const RiskConfig& config,
                           const char* mechanism, uint64_t chain_hash) {
  RiskReport report;
  report.per_location_risk = std::move(risks);
  report.max_risk = report.per_location_risk.empty()
                        ? 0.0
                        : *std::max_element(report.per_location_risk.begin(),
                                            report.per_location_risk.end());
  report.r = config.r;
  report.mechanism = mechanism;
  report.M_quad = config.M_quad;
  report.chain_hash = chain_hash;
  return report;
}

}  // namespace

std::vector<double> cpo_all(const PosteriorChain& chain, const PointPattern& pattern,
                            const TriMesh& mesh, const FemMatrices& fem,
                            CovariatePtr covs, int sample_stride) {
  if (!covs) throw ConfigError("cpo_all: covariates missing");
  if (chain.meta.mesh_hash != mesh_hash(mesh))
    throw ConfigError("cpo_all: chain was fit on a different mesh");
  const ChainView view = view_of(chain, sample_stride);
  const NodeCache node = build_node_cache(mesh, fem, *covs);
  const std::vector<double> log_int = log_integrals(view, node);

  std::vector<double> out(pattern.n());
  std::vector<double> scratch;
  for (int k = 0; k < pattern.n(); ++k) {
    const LocalEval q = local_eval(mesh, *covs, pattern.points[k]);
    out[k] = loo_density_core(view, log_int, q, scratch);
    if (!std::isfinite(out[k]) || out[k] < 0.0)
      throw NumericError("cpo_all: non-finite CPO at point " + std::to_string(k));
  }
  return out;
}

double loo_density_radial(const PosteriorChain& chain_S, Point s_dagger_k, double r,
                          Point query, const TriMesh& mesh, const FemMatrices& fem,
                          CovariatePtr covs, int M_quad, int sample_stride) {
  if (!covs) throw ConfigError("loo_density_radial: covariates missing");
  const Rect& domain = mesh.domain;
  if (!domain.contains(query))
    throw OutOfDomainError("loo_density_radial: query outside the study region");
  if (dist(query, s_dagger_k) > r) return 0.0;  // outside the density's support
  const ChainView view = view_of(chain_S, sample_stride);
  const std::vector<double> log_num =
      log_disk_integrals(view, mesh, *covs, s_dagger_k, r, M_quad, domain);
  const LocalEval q = local_eval(mesh, *covs, query);
  std::vector<double> scratch;
  (void)fem;
  return loo_density_core(view, log_num, q, scratch);
}

double loo_density_joint(const JointChain& chain, Point query, const TriMesh& mesh,
                         const FemMatrices& fem, CovariatePtr covs,
                         int sample_stride) {
  if (!covs) throw ConfigError("loo_density_joint: covariates missing");
  if (!mesh.in_extent(query))
    throw OutOfDomainError("loo_density_joint: query outside meshed region");
  const ChainView view = view_of(chain, sample_stride);
  const NodeCache node = build_node_cache(mesh, fem, *covs);
  const std::vector<double> log_int = log_integrals(view, node);
  const LocalEval q = local_eval(mesh, *covs, query);
  std::vector<double> scratch;
  return loo_density_core(view, log_int, q, scratch);
}

double disclosure_risk(const std::function<double(Point)>& loo_density,
                       const Rect& domain, Point s_k, double r, int M_quad,
                       double lattice_cell) {
  if (!domain.contains(s_k)) throw OutOfDomainError("disclosure_risk: s_k outside Omega");
  if (!(r > 0.0)) throw ConfigError("disclosure_risk: r must be > 0");

  auto clipped = [&](Point p) { return domain.contains(p) ? loo_density(p) : 0.0; };
  const double denom = rect_quadrature(loo_density, domain, lattice_cell);
  if (!(denom > 0.0) || !std::isfinite(denom))
    throw NumericError("disclosure_risk: degenerate density normalizer");
  if (ball_covers_domain(s_k, r, domain)) return 1.0;  // B ∩ Omega = Omega exactly
  const double num = ball_quadrature(clipped, s_k, r, M_quad);
  return std::min(1.0, num / denom);
}

RiskReport max_disclosure_risk_radial(const PosteriorChain& chain,
                                      const PointPattern& confidential,
                                      const PointPattern& synthetic, double synth_r,
                                      const TriMesh& mesh, const FemMatrices& fem,
                                      CovariatePtr covs, const RiskConfig& config,
                                      bool parallel) {
  config.validate();
  if (!covs) throw ConfigError("risk: covariates missing");
  if (!(synth_r > 0.0)) throw ConfigError("risk: radial synthesis radius must be > 0");
  if (confidential.n() != synthetic.n())
    throw ConfigError("risk: confidential and synthetic patterns differ in size");
  if (chain.meta.mesh_hash != mesh_hash(mesh))
    throw ConfigError("risk: chain was fit on a different mesh");
  (void)fem;

  const Rect& domain = confidential.domain;
  const ChainView view = view_of(chain, config.sample_stride);
  const int N = confidential.n();
  std::vector<double> risks(N);

#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int k = 0; k < N; ++k) {
    // The synthesis preserves point order, so the unmatched synthetic point
    // is the k-th one (linkage comes from the release manifest, not inference).
    const Point s_dagger = synthetic.points[k];
    const std::vector<double> log_num = log_disk_integrals(
        view, mesh, *covs, s_dagger, synth_r, config.M_quad, domain);

    std::vector<double> scratch;
    auto density = [&](Point p) -> double {
      if (!domain.contains(p) || dist(p, s_dagger) > synth_r) return 0.0;
      const LocalEval q = local_eval(mesh, *covs, p);
      return loo_density_core(view, log_num, q, scratch);
    };

    // All the mass lives on B_synth_r(s_dagger) ∩ Omega, so the normalizer is
    // a disk quadrature there rather than a domain lattice.
    const double denom =
        ball_quadrature(density, s_dagger, synth_r, config.M_quad);
    const double num = ball_quadrature(density, confidential.points[k], config.r,
                                       config.M_quad);
    risks[k] = denom > 0.0 ? std::min(1.0, num / denom) : 0.0;
  }

  return finalize_report(std::move(risks), config, "radial", chain.hash());
}

RiskReport max_disclosure_risk_joint(const JointChain& chain,
                                     const PointPattern& confidential,
                                     const TriMesh& mesh, const FemMatrices& fem,
                                     CovariatePtr covs, const RiskConfig& config,
                                     bool parallel) {
  config.validate();
  if (!covs) throw ConfigError("risk: covariates missing");
  if (chain.meta.mesh_hash != mesh_hash(mesh))
    throw ConfigError("risk: chain was fit on a different mesh");

  const Rect& domain = confidential.domain;
  const ChainView view = view_of(chain, config.sample_stride);
  const NodeCache node = build_node_cache(mesh, fem, *covs);
  const std::vector<double> log_int = log_integrals(view, node);

  // Domain normalizer, shared by every location.
  const Lattice lat = domain_lattice(domain, mesh.spacing, config.norm_refine);
  std::vector<double> lat_vals(lat.pts.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (long i = 0; i < static_cast<long>(lat.pts.size()); ++i) {
    std::vector<double> scratch;
    const LocalEval q = local_eval(mesh, *covs, lat.pts[i]);
    lat_vals[i] = loo_density_core(view, log_int, q, scratch);
  }
  double denom = 0.0;
  for (double v : lat_vals) denom += v;
  denom *= lat.cell_area;
  if (!(denom > 0.0) || !std::isfinite(denom))
    throw NumericError("risk: degenerate density normalizer");

  const int N = confidential.n();
  std::vector<double> risks(N);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int k = 0; k < N; ++k) {
    std::vector<double> scratch;
    auto density = [&](Point p) -> double {
      if (!domain.contains(p)) return 0.0;
      const LocalEval q = local_eval(mesh, *covs, p);
      return loo_density_core(view, log_int, q, scratch);
    };
    if (ball_covers_domain(confidential.points[k], config.r, domain)) {
      risks[k] = 1.0;
      continue;
    }
    const double num = ball_quadrature(density, confidential.points[k], config.r,
                                       config.M_quad);
    risks[k] = std::min(1.0, num / denom);
  }

  return finalize_report(std::move(risks), config,
                         mechanism_name(chain.mechanism), chain.hash());
}

RiskReport max_disclosure_risk(SynthMechanism mechanism,
                               const PosteriorChain* confidential_chain,
                               const JointChain* joint_chain,
                               const PointPattern& confidential,
                               const PointPattern* synthetic, double synth_r,
                               const TriMesh& mesh, const FemMatrices& fem,
                               CovariatePtr covs, const RiskConfig& config,
                               bool parallel) {
  if (mechanism == SynthMechanism::radial) {
    if (!confidential_chain || !synthetic)
      throw ConfigError(
          "risk: radial mechanism needs the confidential-fit chain and the "
          "synthetic pattern");
    return max_disclosure_risk_radial(*confidential_chain, confidential, *synthetic,
                                      synth_r, mesh, fem, covs, config, parallel);
  }
  if (!joint_chain)
    throw ConfigError("risk: joint mechanisms need a joint chain");
  if (joint_chain->mechanism != mechanism)
    throw ConfigError("risk: mechanism/chain mismatch: chain is '" +
                      std::string(mechanism_name(joint_chain->mechanism)) +
                      "', requested '" + mechanism_name(mechanism) + "'");
  return max_disclosure_risk_joint(*joint_chain, confidential, mesh, fem, covs,
                                   config, parallel);
}

double dp_cost_bound(const std::vector<double>& beta_bounds, double w_bound,
                     const std::vector<double>& covariate_ranges,
                     double log_pd_range) {
  if (beta_bounds.size() != covariate_ranges.size())
    throw ConfigError("dp_cost_bound: one beta bound per covariate range required");
  for (double b : beta_bounds)
    if (b < 0.0) throw ConfigError("dp_cost_bound: bounds must be nonnegative");
  if (w_bound < 0.0 || log_pd_range < 0.0)
    throw ConfigError("dp_cost_bound: bounds must be nonnegative");
  for (double r : covariate_ranges)
    if (r < 0.0) throw ConfigError("dp_cost_bound: ranges must be nonnegative");

  double c = 2.0 * w_bound + log_pd_range;
  for (size_t j = 0; j < beta_bounds.size(); ++j)
    c += covariate_ranges[j] * beta_bounds[j];
  if (!std::isfinite(c)) return std::numeric_limits<double>::infinity();
  return c;
}

void save_risk_csv(const RiskReport& report, const PointPattern& pattern,
                   const std::filesystem::path& path) {
  if (static_cast<int>(report.per_location_risk.size()) != pattern.n())
    throw ConfigError("save_risk_csv: report/pattern size mismatch");
  std::ofstream out(path);
  if (!out) throw ConfigError("save_risk_csv: cannot write " + path.string());
  out << "index,x,y,risk\n";
  char buf[128];
  for (int k = 0; k < pattern.n(); ++k) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", k,
                  pattern.points[k].x, pattern.points[k].y,
                  report.per_location_risk[k]);
    out << buf;
  }
}

}  // namespace lgcp
