#pragma once

#include <string>
#include <vector>

#include "lgcpsynth/model.hpp"

namespace lgcp {

enum class SynthMechanism { radial, ans, prs };

const char* mechanism_name(SynthMechanism m);
SynthMechanism mechanism_from_name(const std::string& name);

struct McmcConfig {
  int iterations = 50000;
  int burn_in = 25000;
  int thin = 5;
  int w_block = 50;      // size of random vertex sub-blocks
  int adapt_batch = 50;  // proposals per adaptation step
  bool prior_only = false;   // debug: drop the likelihood
  bool fix_theta = false;    // debug: freeze hyperparameters at init
  bool freeze_synth = false; // debug: never update the synthetic-surface block
  double init_theta1 = 0.0;
  double init_theta2 = 0.0;

  void validate() const;
};

struct ChainState {
  Eigen::VectorXd beta;
  Eigen::VectorXf w;  // weights stored in float32; reductions run in double
  double th1 = 0.0;
  double th2 = 0.0;
};

// Joint confidential+synthetic state. `synth` holds the noise field v for
// additive-noise fits and the resampled weights w* for resampling fits.
struct JointState : ChainState {
  Eigen::VectorXf synth;
};

struct BlockStats {
  std::string name;
  double acceptance_rate = 0.0;  // measured post burn-in
  double scale_end_burn_in = 0.0;
  double scale_final = 0.0;
};

struct ChainMeta {
  int total_iterations = 0;
  int burn_in = 0;
  int thin = 1;
  std::vector<BlockStats> blocks;
  std::vector<std::string> warnings;
  uint64_t seed = 0;
  uint64_t mesh_hash = 0;
  PriorConfig prior;
};

struct PosteriorChain {
  ChainMeta meta;
  std::vector<ChainState> samples;

  int n_samples() const { return static_cast<int>(samples.size()); }
  uint64_t hash() const;
};

struct JointChain {
  ChainMeta meta;
  SynthMechanism mechanism = SynthMechanism::ans;
  double sigma2 = 0.0;  // additive-noise level, recorded exactly as released
  std::vector<JointState> samples;

  int n_samples() const { return static_cast<int>(samples.size()); }
  uint64_t hash() const;
};

struct PosteriorMeans {
  Eigen::VectorXd beta;
  Eigen::VectorXd w;
  double kappa2 = 0.0;  // averaged on the (kappa2, xi2) scale
  double xi2 = 0.0;
};

PosteriorChain fit_lgcp(const PointPattern& pattern, const TriMesh& mesh,
                        const FemMatrices& fem, CovariatePtr covs,
                        const PriorConfig& prior, const McmcConfig& config,
                        uint64_t seed);

JointChain joint_fit_ans(const PointPattern& confidential,
                         const PointPattern& synthetic, double sigma2,
                         const TriMesh& mesh, const FemMatrices& fem,
                         CovariatePtr covs, const PriorConfig& prior,
                         const McmcConfig& config, uint64_t seed);

JointChain joint_fit_prs(const PointPattern& confidential,
                         const PointPattern& synthetic, const TriMesh& mesh,
                         const FemMatrices& fem, CovariatePtr covs,
                         const PriorConfig& prior, const McmcConfig& config,
                         uint64_t seed);

PosteriorMeans posterior_means(const PosteriorChain& chain);

// p-quantile (linear interpolation) of one beta component across samples.
double beta_quantile(const PosteriorChain& chain, int component, double p);
double beta_quantile(const JointChain& chain, int component, double p);

}  // namespace lgcp
