#include "lgcpsynth/model.hpp"

#include <cmath>

namespace lgcp {

namespace {

// covariate row and offset at a mesh vertex, straight from the rasters
double vertex_row(const CovariateSet& covs, Point vertex, Eigen::VectorXd& x) {
  x.resize(1 + covs.p());
  x[0] = 1.0;
  for (int j = 0; j < covs.p(); ++j) x[1 + j] = covs.covariates[j].at(vertex);
  return covs.log_pd.at(vertex);
}

double logsumexp(const Eigen::VectorXd& t) {
  const double m = t.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((t.array() - m).exp().sum());
}

}  // namespace

LocalEval local_eval(const TriMesh& mesh, const CovariateSet& covs, Point p) {
  LocalEval out;
  out.basis = basis_eval(mesh, p);
  out.x = Eigen::VectorXd::Zero(1 + covs.p());
  out.base = 0.0;
  Eigen::VectorXd xv;
  for (int i = 0; i < 3; ++i) {
    const double phi = out.basis.weight[i];
    if (phi == 0.0) continue;
    out.base += phi * vertex_row(covs, mesh.vertices[out.basis.index[i]], xv);
    out.x += phi * xv;
  }
  return out;
}

double log_intensity_at(const IntensityField& field, const TriMesh& mesh, Point p) {
  if (!mesh.in_extent(p))
    throw OutOfDomainError("log_intensity_at: point outside meshed region");
  const LocalEval e = local_eval(mesh, *field.covs, p);
  double eta = 0.0;
  for (int i = 0; i < 3; ++i) eta += e.basis.weight[i] * field.w[e.basis.index[i]];
  return e.base + e.x.dot(field.beta) + eta;
}

double integrate_intensity(const IntensityField& field, const TriMesh& mesh,
                           const FemMatrices& fem) {
  Eigen::VectorXd t(mesh.n());
  Eigen::VectorXd x;
  for (int i = 0; i < mesh.n(); ++i) {
    const double base = vertex_row(*field.covs, mesh.vertices[i], x);
    t[i] = std::log(fem.dual_volumes[i]) + base + x.dot(field.beta) + field.w[i];
  }
  const double result = std::exp(logsumexp(t));
  if (!std::isfinite(result))
    throw NumericError("integrate_intensity: non-finite intensity integral");
  return result;
}

double log_likelihood(const PointPattern& pattern, const IntensityField& field,
                      const TriMesh& mesh, const FemMatrices& fem) {
  double sum_log = 0.0;
  for (int k = 0; k < pattern.n(); ++k) {
    if (!mesh.in_extent(pattern.points[k]))
      throw OutOfDomainError("log_likelihood: point " + std::to_string(k) +
                             " outside meshed region");
    sum_log += log_intensity_at(field, mesh, pattern.points[k]);
  }
  const double integral = integrate_intensity(field, mesh, fem);
  return sum_log - integral - std::lgamma(pattern.n() + 1.0);
}

double log_prior(const Eigen::VectorXd& beta, double theta1, double theta2,
                 const PriorConfig& prior) {
  if (!(prior.beta_var > 0.0)) throw ConfigError("log_prior: beta_var must be > 0");
  const Eigen::Matrix2d& S = prior.sigma_theta;
  const double det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
  if (!(S(0, 0) > 0.0) || !(det > 0.0) || S(0, 1) != S(1, 0))
    throw ConfigError("log_prior: sigma_theta must be symmetric positive definite");

  double lp = 0.0;
  for (int j = 0; j < beta.size(); ++j)
    lp += -0.5 * std::log(2.0 * M_PI * prior.beta_var) -
          0.5 * beta[j] * beta[j] / prior.beta_var;

  const Eigen::Vector2d th(theta1, theta2);
  const Eigen::Vector2d Sinv_th = S.inverse() * th;
  lp += -std::log(2.0 * M_PI) - 0.5 * std::log(det) - 0.5 * th.dot(Sinv_th);
  return lp;
}

NodeCache build_node_cache(const TriMesh& mesh, const FemMatrices& fem,
                           const CovariateSet& covs) {
  NodeCache cache;
  const int n = mesh.n();
  cache.X.resize(n, 1 + covs.p());
  cache.log_pd.resize(n);
  cache.log_alpha = fem.dual_volumes.array().log();
  Eigen::VectorXd x;
  for (int i = 0; i < n; ++i) {
    cache.log_pd[i] = vertex_row(covs, mesh.vertices[i], x);
    cache.X.row(i) = x;
  }
  return cache;
}

PointCache build_point_cache(const PointPattern& pattern, const TriMesh& mesh,
                             const CovariateSet& covs) {
  PointCache cache;
  const int N = pattern.n();
  cache.X.resize(N, 1 + covs.p());
  cache.log_pd.resize(N);
  cache.basis.reserve(N);
  for (int k = 0; k < N; ++k) {
    const Point p = pattern.points[k];
    if (!mesh.in_extent(p))
      throw OutOfDomainError("build_point_cache: point " + std::to_string(k) +
                             " outside meshed region");
    const LocalEval e = local_eval(mesh, covs, p);
    cache.basis.push_back(e.basis);
    cache.log_pd[k] = e.base;
    cache.X.row(k) = e.x;
  }
  return cache;
}

double log_integral_cached(const NodeCache& node, const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& w) {
  const Eigen::VectorXd t =
      node.log_alpha + node.log_pd + (node.X * beta) + w;
  const double m = t.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((t.array() - m).exp().sum());
}

}  // namespace lgcp
