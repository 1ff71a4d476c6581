#include "lgcpsynth/gmrf.hpp"

#include <cmath>

namespace lgcp {

SpdePrecision::SpdePrecision(const FemMatrices& fem, double kappa2)
    : C_(fem.C), G_(fem.G) {
  sum_log_C_ = C_.array().log().sum();
  set_kappa2(kappa2);
}

void SpdePrecision::set_kappa2(double kappa2) {
  if (!(kappa2 > 0.0)) throw ConfigError("SpdePrecision: kappa2 must be > 0");
  kappa2_ = kappa2;
  L_ = G_;
  for (int i = 0; i < n(); ++i) L_.coeffRef(i, i) += kappa2 * C_[i];
  L_.makeCompressed();
  if (!analyzed_) {
    llt_.analyzePattern(L_);
    analyzed_ = true;
  }
  llt_.factorize(L_);
  if (llt_.info() != Eigen::Success)
    throw NumericError("SpdePrecision: Cholesky factorization of L failed");
  const double logdet_L =
      2.0 * llt_.matrixL().nestedExpression().diagonal().array().log().sum();
  logdet_Q_ = 2.0 * logdet_L - sum_log_C_;
}

double SpdePrecision::quad_form(const Eigen::VectorXd& w) const {
  const Eigen::VectorXd Lw = kappa2_ * C_.cwiseProduct(w) + G_ * w;
  return (Lw.array().square() / C_.array()).sum();
}

Eigen::VectorXd SpdePrecision::sample(double s2, Rng& rng) const {
  if (s2 < 0.0) throw ConfigError("SpdePrecision::sample: variance must be >= 0");
  if (s2 == 0.0) return Eigen::VectorXd::Zero(n());
  Eigen::VectorXd z(n());
  for (int i = 0; i < n(); ++i) z[i] = rng.normal();
  const Eigen::VectorXd b = C_.cwiseSqrt().cwiseProduct(z);
  return std::sqrt(s2) * llt_.solve(b);
}

Eigen::VectorXd SpdePrecision::marginal_variances() const {
  // Q^{-1} = L^{-1} C L^{-1}: with X = L^{-1} C^{1/2}, diag(Q^{-1}) is the
  // row-wise squared norm of X.
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n(), n());
  rhs.diagonal() = C_.cwiseSqrt();
  const Eigen::MatrixXd X = llt_.solve(rhs);
  return X.array().square().rowwise().sum();
}

double SpdePrecision::log_density(const Eigen::VectorXd& w, double s2) const {
  if (!(s2 > 0.0)) throw ConfigError("SpdePrecision::log_density: variance must be > 0");
  const int d = n();
  return -0.5 * d * std::log(2.0 * M_PI * s2) + 0.5 * logdet_Q_ -
         0.5 * quad_form(w) / s2;
}

}  // namespace lgcp
