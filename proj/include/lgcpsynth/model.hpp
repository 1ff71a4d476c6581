#pragma once

#include "lgcpsynth/fem.hpp"
#include "lgcpsynth/field.hpp"
#include "lgcpsynth/gmrf.hpp"

namespace lgcp {

struct PriorConfig {
  double beta_var = 2.0;  // beta ~ N(0, beta_var * I)
  Eigen::Matrix2d sigma_theta = Eigen::Matrix2d::Identity();
  double log_rho0 = 0.0;
  double log_sigma0 = 0.0;
};

// Covariates and the offset enter the model through their piecewise-linear
// projection on the mesh basis: values at arbitrary points interpolate the
// nodal values. This keeps the point terms of the likelihood numerically
// consistent with the dual-cell integral, which only sees nodes; intensity
// structure between nodes would otherwise be invisible to the integral and
// fits could inflate coefficients without bound.
struct LocalEval {
  double base = 0.0;   // projected log pd at the point
  Eigen::VectorXd x;   // projected covariate row, intercept first
  Basis basis;
};

LocalEval local_eval(const TriMesh& mesh, const CovariateSet& covs, Point p);

double log_intensity_at(const IntensityField& field, const TriMesh& mesh, Point p);

// Dual-cell approximation of the intensity integral over the meshed region:
// sum_i alpha_i * exp(log pd(s_i) + x'(s_i) beta + w_i) over mesh nodes s_i.
// Evaluated in log space with max-shift.
double integrate_intensity(const IntensityField& field, const TriMesh& mesh,
                           const FemMatrices& fem);

// sum_k log lambda(s_k) - integral - log N!
double log_likelihood(const PointPattern& pattern, const IntensityField& field,
                      const TriMesh& mesh, const FemMatrices& fem);

// Gaussian log prior of (beta, theta); the w term is added by callers that
// hold a factorized precision (see SpdePrecision::log_density).
double log_prior(const Eigen::VectorXd& beta, double theta1, double theta2,
                 const PriorConfig& prior);

// ---- cached evaluation ------------------------------------------------
// Covariates, offset and quadrature weights evaluated once per mesh/pattern;
// the hot paths in fitting and scoring work off these.

struct NodeCache {
  Eigen::MatrixXd X;          // n x (1+p), intercept column first
  Eigen::VectorXd log_pd;     // n
  Eigen::VectorXd log_alpha;  // n, log dual volumes

  int n() const { return static_cast<int>(log_pd.size()); }
};

struct PointCache {
  Eigen::MatrixXd X;       // N x (1+p)
  Eigen::VectorXd log_pd;  // N
  std::vector<Basis> basis;

  int n() const { return static_cast<int>(log_pd.size()); }
};

NodeCache build_node_cache(const TriMesh& mesh, const FemMatrices& fem,
                           const CovariateSet& covs);
PointCache build_point_cache(const PointPattern& pattern, const TriMesh& mesh,
                             const CovariateSet& covs);

// log integral of the intensity with coefficients (beta, w) over the meshed
// region, using cached node values.
double log_integral_cached(const NodeCache& node, const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& w);

}  // namespace lgcp
