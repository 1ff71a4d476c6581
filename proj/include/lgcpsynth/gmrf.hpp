#pragma once

#include <Eigen/SparseCholesky>

#include "lgcpsynth/fem.hpp"
#include "lgcpsynth/rng.hpp"

namespace lgcp {

// Gaussian field machinery for weights w ~ N(0, s2 * Q^{-1}) with
// Q = L C^{-1} L and L = kappa2*C + G. Both sampling and density evaluation
// go through a sparse Cholesky factorization of L, never of Q:
//   sample:    x = L^{-1} C^{1/2} z,  z ~ N(0, I)
//   quad form: w'Qw = || C^{-1/2} L w ||^2
//   log det Q: 2 log det L - sum(log C)
class SpdePrecision {
 public:
  SpdePrecision(const FemMatrices& fem, double kappa2);

  // Refactorize for a new spatial scale; the symbolic pattern is reused.
  void set_kappa2(double kappa2);

  double kappa2() const { return kappa2_; }
  int n() const { return static_cast<int>(C_.size()); }

  double quad_form(const Eigen::VectorXd& w) const;
  double logdet_Q() const { return logdet_Q_; }

  // Draw from N(0, s2 * Q^{-1}).
  Eigen::VectorXd sample(double s2, Rng& rng) const;

  // diag(Q^{-1}); dense solve, intended for one-off use at setup time.
  Eigen::VectorXd marginal_variances() const;

  // log N(w; 0, s2 * Q^{-1})
  double log_density(const Eigen::VectorXd& w, double s2) const;

 private:
  Eigen::VectorXd C_;
  SparseMat G_;
  SparseMat L_;
  Eigen::SimplicialLLT<SparseMat> llt_;
  double kappa2_ = 0.0;
  double logdet_Q_ = 0.0;
  double sum_log_C_ = 0.0;
  bool analyzed_ = false;
};

}  // namespace lgcp
