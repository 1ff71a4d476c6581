#include "lgcpsynth/field.hpp"

#include <cmath>

namespace lgcp {

Hyperparams prior_transform(double theta1, double theta2, double log_rho0,
                            double log_sigma0) {
  const double log_rho = log_rho0 + theta1;
  const double log_sigma = log_sigma0 + theta2;
  const double log_kappa = 0.5 * std::log(8.0) - log_rho;
  // sigma2 = xi2 / (4 pi kappa2)  =>  log xi = log sigma + log sqrt(4 pi) + log kappa
  const double log_xi = log_sigma + 0.5 * std::log(4.0 * M_PI) + log_kappa;
  Hyperparams h;
  h.kappa2 = std::exp(2.0 * log_kappa);
  h.xi2 = std::exp(2.0 * log_xi);
  return h;
}

std::pair<double, double> theta_from_hyperparams(const Hyperparams& h,
                                                 double log_rho0,
                                                 double log_sigma0) {
  const double theta1 = std::log(h.rho()) - log_rho0;
  const double theta2 = 0.5 * std::log(h.sigma2()) - log_sigma0;
  return {theta1, theta2};
}

}  // namespace lgcp
