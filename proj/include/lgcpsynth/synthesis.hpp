#pragma once

#include "lgcpsynth/mcmc.hpp"

namespace lgcp {

struct SynthesisSpec {
  SynthMechanism mechanism = SynthMechanism::prs;
  double radius = 0.0;            // radial only, meters
  double sigma2 = 0.0;            // additive-noise level
  double candidate_multiplier = 100.0;  // N*/N for intensity-driven sampling
  uint64_t seed = 0;
  int replicate = 0;  // distinguishes repeated draws of the same spec

  void validate() const;
  std::string tag() const;  // stable row label, e.g. "radial_r50_rep0"
};

// Independent uniform perturbation within a disk of radius r around each
// point; draws landing outside the domain are redrawn until inside.
PointPattern radial_synthesize(const PointPattern& pattern, double r, uint64_t seed);

// Plug-in surface with an additive noise field: weights w_hat + v with
// v ~ N(0, sigma2 * Q^{-1}) at the posterior-mean spatial scale. sigma2 = 0
// returns the plug-in surface exactly.
IntensityField ans_intensity(const PosteriorMeans& fit, double sigma2,
                             CovariatePtr covs, const TriMesh& mesh,
                             const FemMatrices& fem, uint64_t seed);

// Plug-in fixed effects with the spatial field redrawn from its prior at the
// posterior-mean hyperparameters: weights w* ~ N(0, xi2_hat * Q^{-1}).
IntensityField prs_intensity(const PosteriorMeans& fit, CovariatePtr covs,
                             const TriMesh& mesh, const FemMatrices& fem,
                             uint64_t seed);

// Weighted sampling without replacement of N locations from
// candidate_multiplier * N uniform candidates, with weights proportional to
// the intensity at each candidate (exponential-keys method).
PointPattern sample_pattern(const IntensityField& field, int N,
                            double candidate_multiplier, const TriMesh& mesh,
                            const Rect& domain, uint64_t seed);

}  // namespace lgcp
