#pragma once

#include <functional>

#include "lgcpsynth/mcmc.hpp"
#include "lgcpsynth/quadrature.hpp"

namespace lgcp {

struct RiskConfig {
  double r = 50.0;        // identification radius (meters)
  int M_quad = 10000;     // disk quadrature cells, perfect square
  int norm_refine = 1;    // lattice refinement for the domain normalizer
  int sample_stride = 1;  // use every stride-th stored sample

  void validate() const;
};

struct RiskReport {
  std::vector<double> per_location_risk;  // one probability per pattern point
  double max_risk = 0.0;
  double r = 0.0;
  std::string mechanism;
  int M_quad = 0;
  uint64_t chain_hash = 0;
};

// CPO_k = [ (1/M) sum_m integral(lambda_m) / lambda_m(s_k) ]^{-1} for every
// pattern point, with the intensity integral computed once per sample.
std::vector<double> cpo_all(const PosteriorChain& chain, const PointPattern& pattern,
                            const TriMesh& mesh, const FemMatrices& fem,
                            CovariatePtr covs, int sample_stride = 1);

// Leave-one-out density for radial synthesis at a query point. The density is
// supported on the disk of radius r around the synthetic point s_dagger_k
// (the perturbation makes the two points mutually within r); inside it equals
// [ E ( integral_{B_r(s_dagger_k) ∩ Omega} lambda / lambda(query) ) ]^{-1}
// under the confidential-fit posterior.
double loo_density_radial(const PosteriorChain& chain_S, Point s_dagger_k, double r,
                          Point query, const TriMesh& mesh, const FemMatrices& fem,
                          CovariatePtr covs, int M_quad, int sample_stride = 1);

// Leave-one-out density for the joint mechanisms, using the
// confidential-surface draws of the joint chain:
// [ (1/L) sum_l integral(lambda_l) / lambda_l(query) ]^{-1}.
double loo_density_joint(const JointChain& chain, Point query, const TriMesh& mesh,
                         const FemMatrices& fem, CovariatePtr covs,
                         int sample_stride = 1);

// Probability mass of the (numerically normalized) leave-one-out density in
// B_r(s_k) ∩ Omega: disk quadrature over the ball divided by a midpoint
// lattice quadrature over Omega with cells of side lattice_cell.
// If the ball covers Omega entirely the ratio is exactly 1.
double disclosure_risk(const std::function<double(Point)>& loo_density,
                       const Rect& domain, Point s_k, double r, int M_quad,
                       double lattice_cell);

RiskReport max_disclosure_risk_radial(const PosteriorChain& chain,
                                      const PointPattern& confidential,
                                      const PointPattern& synthetic, double synth_r,
                                      const TriMesh& mesh, const FemMatrices& fem,
                                      CovariatePtr covs, const RiskConfig& config,
                                      bool parallel = true);

RiskReport max_disclosure_risk_joint(const JointChain& chain,
                                     const PointPattern& confidential,
                                     const TriMesh& mesh, const FemMatrices& fem,
                                     CovariatePtr covs, const RiskConfig& config,
                                     bool parallel = true);

// Dispatcher enforcing the mechanism/chain pairing: radial scores against the
// confidential-only chain, ans/prs against a joint chain of the same kind.
RiskReport max_disclosure_risk(SynthMechanism mechanism,
                               const PosteriorChain* confidential_chain,
                               const JointChain* joint_chain,
                               const PointPattern& confidential,
                               const PointPattern* synthetic, double synth_r,
                               const TriMesh& mesh, const FemMatrices& fem,
                               CovariatePtr covs, const RiskConfig& config,
                               bool parallel = true);

// Worst-case log-intensity difference bound: with basis weights bounded by
// w_bound and sum_i phi_i(s) = 1, the basis term contributes at most
// 2*w_bound; covariates contribute range_j * |beta_j| bound; the offset its
// own range. Releasing one posterior sample is then 2C-private.
// Any infinite input yields the infinity sentinel.
double dp_cost_bound(const std::vector<double>& beta_bounds, double w_bound,
                     const std::vector<double>& covariate_ranges,
                     double log_pd_range);

void save_risk_csv(const RiskReport& report, const PointPattern& pattern,
                   const std::filesystem::path& path);

}  // namespace lgcp
