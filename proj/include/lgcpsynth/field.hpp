#pragma once

#include <memory>
#include <vector>

#include "lgcpsynth/raster.hpp"

namespace lgcp {

// Covariate data shared by every intensity surface in a fit: standardized
// continuous covariates plus the log population-density offset. Immutable
// after construction and safe to share across threads.
struct CovariateSet {
  std::vector<ScalarField> covariates;
  ScalarField log_pd;

  int p() const { return static_cast<int>(covariates.size()); }
};

using CovariatePtr = std::shared_ptr<const CovariateSet>;

// log lambda(s) = log pd(s) + x'(s) beta + sum_i phi_i(s) w_i
struct IntensityField {
  Eigen::VectorXd beta;  // intercept first, length 1 + p
  Eigen::VectorXd w;     // mesh vertex weights, length n
  CovariatePtr covs;
};

// Spatial scale and variance of the Matern field; effective range and
// marginal variance are always derived, never stored.
struct Hyperparams {
  double kappa2 = 1.0;
  double xi2 = 1.0;

  double rho() const { return std::sqrt(8.0 / kappa2); }
  double sigma2() const { return xi2 / (4.0 * M_PI * kappa2); }
};

// Centered reparameterization (theta1, theta2) -> (kappa2, xi2) around the
// baseline range rho0 and marginal standard deviation sigma0:
//   log rho   = log rho0   + theta1
//   log sigma = log sigma0 + theta2
// so theta2 moves the marginal variance with the range held fixed.
Hyperparams prior_transform(double theta1, double theta2, double log_rho0,
                            double log_sigma0);

// Inverse of prior_transform.
std::pair<double, double> theta_from_hyperparams(const Hyperparams& h,
                                                 double log_rho0,
                                                 double log_sigma0);

}  // namespace lgcp
