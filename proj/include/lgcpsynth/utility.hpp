#pragma once

#include "lgcpsynth/mcmc.hpp"

namespace lgcp {

struct UtilityReport {
  double pmse = 0.0;                  // in [0, 0.25]
  std::vector<double> per_point_phat; // 2N values, confidential points first
  int L = 0;                          // paired samples used
  uint64_t chain_hash_S = 0;
  uint64_t chain_hash_Sdagger = 0;
};

// P(y belongs to the confidential set | lambda, lambda_dagger) with equal
// prior odds: lambda(y) / (lambda(y) + (I/I_dagger) * lambda_dagger(y)),
// computed in log space.
double classification_prob(const IntensityField& lambda,
                           const IntensityField& lambda_dagger, Point y,
                           const TriMesh& mesh, const FemMatrices& fem);

// Monte Carlo probability of correct classification: the average of
// p_l^{x} (1-p_l)^{1-x} over paired posterior draws.
double expected_correct(const std::vector<double>& p_l, int x_k);

// Propensity mean square error between a confidential and a synthetic
// pattern from their independently fitted chains. Chains are paired
// positionally and truncated to the shorter one.
UtilityReport pmse(const PosteriorChain& chain_S, const PosteriorChain& chain_Sdagger,
                   const PointPattern& S, const PointPattern& S_dagger,
                   const TriMesh& mesh, const FemMatrices& fem, CovariatePtr covs,
                   bool parallel = true);

}  // namespace lgcp
