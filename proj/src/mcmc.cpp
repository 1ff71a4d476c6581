#include "lgcpsynth/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lgcpsynth/rng.hpp"

namespace lgcp {

const char* mechanism_name(SynthMechanism m) {
  switch (m) {
    case SynthMechanism::radial: return "radial";
    case SynthMechanism::ans: return "ans";
    case SynthMechanism::prs: return "prs";
  }
  return "?";
}

SynthMechanism mechanism_from_name(const std::string& name) {
  if (name == "radial") return SynthMechanism::radial;
  if (name == "ans") return SynthMechanism::ans;
  if (name == "prs") return SynthMechanism::prs;
  throw ConfigError("unknown synthesis mechanism '" + name + "'");
}

void McmcConfig::validate() const {
  if (iterations <= 0) throw ConfigError("mcmc: iterations must be > 0");
  if (burn_in < 0 || burn_in >= iterations)
    throw ConfigError("mcmc: burn_in must be in [0, iterations)");
  if (thin < 1) throw ConfigError("mcmc: thin must be >= 1");
  if (w_block < 1) throw ConfigError("mcmc: w_block must be >= 1");
  if (adapt_batch < 1) throw ConfigError("mcmc: adapt_batch must be >= 1");
}

namespace {

constexpr double kMaxNodeLogTerm = 600.0;  // exp() overflow guard
constexpr int kStuckLimit = 10000;

enum class FitKind { single, joint_ans, joint_prs };

// Per-surface cached evaluation state. All cached vectors are exact functions
// of the current parameter values; sums are recomputed in full on every
// evaluation so accepted-state caches never accumulate drift.
struct Surface {
  const PointCache* pts = nullptr;
  Eigen::VectorXd node_base;  // log_alpha + log_pd at nodes
  Eigen::VectorXd pt_base;    // log_pd at points
  Eigen::VectorXd Xbeta_node, Xbeta_pts;
  Eigen::VectorXd weights;  // node weights of this surface
  Eigen::VectorXd t, exp_t;  // node log terms and their exponentials
  Eigen::VectorXd q;         // point log intensities
  std::vector<std::vector<int>> pts_of_vertex;
  // scratch marks for proposal evaluation
  std::vector<int> node_mark, node_slot, pt_mark, pt_slot;
  int epoch = 0;
  // scratch buffers written by proposal evaluation, committed on accept
  Eigen::VectorXd scratch_Xbeta_node, scratch_Xbeta_pts, scratch_t, scratch_exp_t,
      scratch_q;
  std::vector<double> cand_t, cand_exp, cand_q;
  std::vector<int> cand_pts;

  void init(const NodeCache& node, const PointCache& cache, int n) {
    pts = &cache;
    node_base = node.log_alpha + node.log_pd;
    pt_base = cache.log_pd;
    pts_of_vertex.assign(n, {});
    for (int k = 0; k < cache.n(); ++k)
      for (int i = 0; i < 3; ++i) pts_of_vertex[cache.basis[k].index[i]].push_back(k);
    node_mark.assign(n, -1);
    node_slot.assign(n, -1);
    pt_mark.assign(cache.n(), -1);
    pt_slot.assign(cache.n(), -1);
  }

  void rebuild(const NodeCache& node, const Eigen::VectorXd& beta,
               const Eigen::VectorXd& w_surface) {
    weights = w_surface;
    Xbeta_node = node.X * beta;
    Xbeta_pts = pts->X * beta;
    t = node_base + Xbeta_node + weights;
    exp_t = t.array().exp();
    q.resize(pts->n());
    for (int k = 0; k < pts->n(); ++k) q[k] = point_log_intensity(k);
  }

  double point_log_intensity(int k) const {
    const Basis& b = pts->basis[k];
    double eta = 0.0;
    for (int i = 0; i < 3; ++i) eta += b.weight[i] * weights[b.index[i]];
    return pt_base[k] + Xbeta_pts[k] + eta;
  }

  double loglik() const { return q.sum() - exp_t.sum(); }
};

// Quadratic-form bookkeeping for one weight vector under Q = L C^{-1} L:
// w'Qw = kappa2^2 * a + 2 kappa2 * b + c, so hyperparameter proposals need no
// matrix work at all.
struct WeightPrior {
  double a = 0.0, b = 0.0, c = 0.0;

  void refresh(const Eigen::VectorXd& v, const SparseMat& G,
               const Eigen::VectorXd& C) {
    const Eigen::VectorXd Gv = G * v;
    a = C.cwiseProduct(v).dot(v);
    b = v.dot(Gv);
    c = (Gv.array().square() / C.array()).sum();
  }
  double quad(double kappa2) const { return kappa2 * kappa2 * a + 2.0 * kappa2 * b + c; }
};

double gmrf_logpdf(int n, double logdet_Q, double quad, double s2) {
  return -0.5 * n * std::log(2.0 * M_PI * s2) + 0.5 * logdet_Q - 0.5 * quad / s2;
}

struct AdaptiveBlock {
  std::string name;
  double log_scale = std::log(0.1);
  double target = 0.234;
  int batch_accepts = 0, batch_count = 0, n_batches = 0;
  long post_accepts = 0, post_count = 0;
  double scale_end_burn_in = 0.0;

  double scale() const { return std::exp(log_scale); }

  void record(bool accepted, bool adapting, int batch_size) {
    if (adapting) {
      ++batch_count;
      batch_accepts += accepted ? 1 : 0;
      if (batch_count >= batch_size) {
        ++n_batches;
        const double delta = std::min(0.05, 1.0 / std::sqrt(double(n_batches)));
        log_scale += (batch_accepts > target * batch_count) ? delta : -delta;
        batch_count = 0;
        batch_accepts = 0;
      }
    } else {
      ++post_count;
      post_accepts += accepted ? 1 : 0;
    }
  }
};

class Sampler {
 public:
  Sampler(FitKind kind, const PointPattern& pattern1, const PointPattern* pattern2,
          double sigma2, const TriMesh& mesh, const FemMatrices& fem,
          CovariatePtr covs, const PriorConfig& prior, const McmcConfig& cfg,
          uint64_t seed)
      : kind_(kind),
        fem_(fem),
        prior_(prior),
        cfg_(cfg),
        sigma2_(sigma2),
        rng_(seed),
        spde_(fem, prior_transform(cfg.init_theta1, cfg.init_theta2, prior.log_rho0,
                                   prior.log_sigma0)
                       .kappa2) {
    cfg.validate();
    if (pattern1.n() == 0) throw ConfigError("fit: pattern is empty");
    if (!covs) throw ConfigError("fit: covariates missing");
    // validates sigma_theta
    log_prior(Eigen::VectorXd::Zero(1), 0.0, 0.0, prior);

    n_ = mesh.n();
    node_ = build_node_cache(mesh, fem, *covs);
    pts1_ = build_point_cache(pattern1, mesh, *covs);
    s1_.init(node_, pts1_, n_);
    if (kind != FitKind::single) {
      if (!pattern2) throw ConfigError("joint fit: synthetic pattern missing");
      pts2_ = build_point_cache(*pattern2, mesh, *covs);
      s2_.init(node_, pts2_, n_);
    }

    const int d = static_cast<int>(node_.X.cols());
    beta_ = Eigen::VectorXd::Zero(d);
    w_ = Eigen::VectorXd::Zero(n_);
    synth_ = Eigen::VectorXd::Zero(n_);

    // Weight proposals are preconditioned by the prior marginal sd at the
    // initial spatial scale (normalized to geometric mean 1); boundary
    // vertices carry several times the interior variance and a single scalar
    // step size serves them poorly.
    wprop_sd_ = spde_.marginal_variances().cwiseSqrt();
    wprop_sd_ /= std::exp(wprop_sd_.array().log().mean());
    th1_ = cfg.init_theta1;
    th2_ = cfg.init_theta2;
    hp_ = prior_transform(th1_, th2_, prior.log_rho0, prior.log_sigma0);
    logdet_Q_ = spde_.logdet_Q();

    rebuild_all();

    blk_beta_.name = "beta";
    blk_beta_.target = d > 1 ? 0.234 : 0.44;
    blk_w_.name = "w";
    blk_w_.target = std::min(n_, cfg.w_block) > 1 ? 0.234 : 0.44;
    blk_synth_.name = kind == FitKind::joint_prs ? "wstar" : "v";
    blk_synth_.target = blk_w_.target;
    blk_theta_.name = "theta";
    blk_theta_.target = 0.234;

    if (!std::isfinite(log_posterior()))
      throw NumericError("fit: non-finite log posterior at initialization");
  }

  bool has_synth_block() const {
    if (kind_ == FitKind::single || cfg_.freeze_synth) return false;
    if (kind_ == FitKind::joint_ans && sigma2_ == 0.0) return false;  // v pinned at 0
    return true;
  }

  double log_posterior() const {
    return loglik1_ + loglik2_ + lp_w_ + lp_synth_ + lp_beta_ + lp_theta_;
  }

  void run(ChainMeta& meta, std::vector<ChainState>* single_out,
           std::vector<JointState>* joint_out) {
    std::vector<int> perm(n_);
    for (int i = 0; i < n_; ++i) perm[i] = i;
    const int stored =
        (cfg_.iterations - cfg_.burn_in) / cfg_.thin;
    if (single_out) single_out->reserve(stored);
    if (joint_out) joint_out->reserve(stored);

    const bool selfcheck = std::getenv("LGCP_MCMC_SELFCHECK") != nullptr;
    for (int it = 0; it < cfg_.iterations; ++it) {
      const bool adapting = it < cfg_.burn_in;
      if (selfcheck && it % 500 == 0) verify_caches(it);

      update_beta(adapting);
      update_weight_blocks(blk_w_, /*synth=*/false, perm, adapting);
      if (has_synth_block())
        update_weight_blocks(blk_synth_, /*synth=*/true, perm, adapting);
      if (!cfg_.fix_theta) update_theta(adapting);

      if (it == cfg_.burn_in - 1 || (cfg_.burn_in == 0 && it == 0)) {
        for (auto* b : active_blocks()) b->scale_end_burn_in = b->scale();
      }
      if (it >= cfg_.burn_in && (it - cfg_.burn_in) % cfg_.thin == cfg_.thin - 1) {
        if (single_out) {
          ChainState s;
          s.beta = beta_;
          s.w = w_.cast<float>();
          s.th1 = th1_;
          s.th2 = th2_;
          single_out->push_back(std::move(s));
        } else {
          JointState s;
          s.beta = beta_;
          s.w = w_.cast<float>();
          s.synth = synth_.cast<float>();
          s.th1 = th1_;
          s.th2 = th2_;
          joint_out->push_back(std::move(s));
        }
      }
    }

    meta.total_iterations = cfg_.iterations;
    meta.burn_in = cfg_.burn_in;
    meta.thin = cfg_.thin;
    meta.prior = prior_;
    for (auto* b : active_blocks()) {
      BlockStats st;
      st.name = b->name;
      st.acceptance_rate =
          b->post_count > 0 ? double(b->post_accepts) / double(b->post_count) : 0.0;
      st.scale_end_burn_in = b->scale_end_burn_in;
      st.scale_final = b->scale();
      if (b->post_count > 0 &&
          (st.acceptance_rate < 0.05 || st.acceptance_rate > 0.95))
        meta.warnings.push_back("tuning warning: block '" + b->name +
                                "' post-burn-in acceptance " +
                                std::to_string(st.acceptance_rate) +
                                " outside [0.05, 0.95]");
      meta.blocks.push_back(std::move(st));
    }
  }

 private:
  // Debug-only: recompute every cached term from scratch and compare.
  void verify_caches(int it) {
    auto expect = [&](double cached, double fresh, const char* what) {
      const double tol = 1e-6 * (1.0 + std::abs(fresh));
      if (std::abs(cached - fresh) > tol)
        throw NumericError("mcmc selfcheck failed at iteration " +
                           std::to_string(it) + ": " + what + " cached " +
                           std::to_string(cached) + " fresh " +
                           std::to_string(fresh));
    };
    if (!cfg_.prior_only) {
      Surface fresh1;
      fresh1.init(node_, pts1_, n_);
      fresh1.rebuild(node_, beta_, w_);
      expect(loglik1_, fresh1.loglik(), "loglik1");
      if (kind_ != FitKind::single) {
        Surface fresh2;
        fresh2.init(node_, pts2_, n_);
        fresh2.rebuild(node_, beta_, surface2_weights());
        expect(loglik2_, fresh2.loglik(), "loglik2");
      }
    }
    SpdePrecision fresh_spde(fem_, hp_.kappa2);
    expect(logdet_Q_, fresh_spde.logdet_Q(), "logdetQ");
    expect(lp_w_, gmrf_logpdf(n_, fresh_spde.logdet_Q(), fresh_spde.quad_form(w_),
                              hp_.xi2),
           "lp_w");
    if (kind_ == FitKind::joint_ans && sigma2_ > 0.0)
      expect(lp_synth_, gmrf_logpdf(n_, fresh_spde.logdet_Q(),
                                    fresh_spde.quad_form(synth_), sigma2_),
             "lp_v");
    else if (kind_ == FitKind::joint_prs)
      expect(lp_synth_, gmrf_logpdf(n_, fresh_spde.logdet_Q(),
                                    fresh_spde.quad_form(synth_), hp_.xi2),
             "lp_wstar");
    expect(lp_beta_, beta_logpdf(beta_), "lp_beta");
    expect(lp_theta_, theta_logpdf(th1_, th2_), "lp_theta");
  }

  std::vector<AdaptiveBlock*> active_blocks() {
    std::vector<AdaptiveBlock*> out{&blk_beta_, &blk_w_};
    if (has_synth_block()) out.push_back(&blk_synth_);
    if (!cfg_.fix_theta) out.push_back(&blk_theta_);
    return out;
  }

  Eigen::VectorXd surface2_weights() const {
    return kind_ == FitKind::joint_ans ? Eigen::VectorXd(w_ + synth_) : synth_;
  }

  void rebuild_all() {
    s1_.rebuild(node_, beta_, w_);
    loglik1_ = cfg_.prior_only ? 0.0 : s1_.loglik();
    loglik2_ = 0.0;
    lp_synth_ = 0.0;
    if (kind_ != FitKind::single) {
      s2_.rebuild(node_, beta_, surface2_weights());
      loglik2_ = cfg_.prior_only ? 0.0 : s2_.loglik();
    }
    pw_.refresh(w_, fem_.G, fem_.C);
    lp_w_ = gmrf_logpdf(n_, logdet_Q_, pw_.quad(hp_.kappa2), hp_.xi2);
    if (kind_ == FitKind::joint_ans && sigma2_ > 0.0) {
      psynth_.refresh(synth_, fem_.G, fem_.C);
      lp_synth_ = gmrf_logpdf(n_, logdet_Q_, psynth_.quad(hp_.kappa2), sigma2_);
    } else if (kind_ == FitKind::joint_prs) {
      psynth_.refresh(synth_, fem_.G, fem_.C);
      lp_synth_ = gmrf_logpdf(n_, logdet_Q_, psynth_.quad(hp_.kappa2), hp_.xi2);
    }
    lp_beta_ = beta_logpdf(beta_);
    lp_theta_ = theta_logpdf(th1_, th2_);
  }

  double theta_logpdf(double t1, double t2) const {
    const Eigen::Matrix2d& S = prior_.sigma_theta;
    const double det = S(0, 0) * S(1, 1) - S(0, 1) * S(1, 0);
    const Eigen::Vector2d th(t1, t2);
    const double quad = th.dot(S.inverse() * th);
    return -std::log(2.0 * M_PI) - 0.5 * std::log(det) - 0.5 * quad;
  }

  double beta_logpdf(const Eigen::VectorXd& beta) const {
    double lp = 0.0;
    for (int j = 0; j < beta.size(); ++j)
      lp += -0.5 * std::log(2.0 * M_PI * prior_.beta_var) -
            0.5 * beta[j] * beta[j] / prior_.beta_var;
    return lp;
  }

  void tally(AdaptiveBlock& blk, bool accepted, bool adapting) {
    blk.record(accepted, adapting, cfg_.adapt_batch);
    if (accepted) {
      stuck_ = 0;
    } else if (++stuck_ >= kStuckLimit) {
      throw NumericError("stuck chain: zero acceptance over " +
                         std::to_string(kStuckLimit) + " consecutive proposals");
    }
  }

  bool accept(double log_ratio) {
    if (!std::isfinite(log_ratio)) return false;
    return std::log(rng_.uniform01()) < log_ratio;
  }

  // ---- beta ----
  void update_beta(bool adapting) {
    const int d = static_cast<int>(beta_.size());
    Eigen::VectorXd prop = beta_;
    const double scale = blk_beta_.scale();
    for (int j = 0; j < d; ++j) prop[j] += scale * rng_.normal();

    double ll1 = 0.0, ll2 = 0.0;
    bool ok = true;
    if (!cfg_.prior_only) {
      ok = surface_beta_loglik(s1_, prop, w_, ll1);
      if (ok && kind_ != FitKind::single)
        ok = surface_beta_loglik(s2_, prop, surface2_weights(), ll2);
    }
    const double lpb = beta_logpdf(prop);
    bool accepted = false;
    if (ok) {
      const double delta = (ll1 + ll2 + lpb) - (loglik1_ + loglik2_ + lp_beta_);
      if (accept(delta)) {
        accepted = true;
        beta_ = prop;
        if (!cfg_.prior_only) {
          commit_beta(s1_, w_);
          if (kind_ != FitKind::single) commit_beta(s2_, surface2_weights());
        }
        loglik1_ = ll1;
        loglik2_ = ll2;
        lp_beta_ = lpb;
      }
    }
    tally(blk_beta_, accepted, adapting);
  }

  // Evaluates the surface log likelihood under a proposed beta into scratch
  // buffers kept on the surface; commit_beta moves them into place.
  bool surface_beta_loglik(Surface& s, const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& weights, double& ll) {
    s.scratch_Xbeta_node = node_.X * beta;
    s.scratch_t = s.node_base + s.scratch_Xbeta_node + weights;
    if (s.scratch_t.maxCoeff() > kMaxNodeLogTerm) return false;
    s.scratch_exp_t = s.scratch_t.array().exp();
    s.scratch_Xbeta_pts = s.pts->X * beta;
    s.scratch_q = s.pt_base + s.scratch_Xbeta_pts;
    for (int k = 0; k < s.pts->n(); ++k) {
      const Basis& b = s.pts->basis[k];
      double eta = 0.0;
      for (int i = 0; i < 3; ++i) eta += b.weight[i] * weights[b.index[i]];
      s.scratch_q[k] += eta;
    }
    ll = s.scratch_q.sum() - s.scratch_exp_t.sum();
    return std::isfinite(ll);
  }

  void commit_beta(Surface& s, const Eigen::VectorXd& weights) {
    s.weights = weights;
    s.Xbeta_node = s.scratch_Xbeta_node;
    s.Xbeta_pts = s.scratch_Xbeta_pts;
    s.t = s.scratch_t;
    s.exp_t = s.scratch_exp_t;
    s.q = s.scratch_q;
  }

  // ---- weight blocks (w, v, or w*) ----
  void update_weight_blocks(AdaptiveBlock& blk, bool synth_vec,
                            std::vector<int>& perm, bool adapting) {
    // fresh random partition into sub-blocks each sweep
    for (int i = n_ - 1; i > 0; --i)
      std::swap(perm[i], perm[static_cast<int>(rng_.below(i + 1))]);
    const int bs = std::min(n_, cfg_.w_block);
    for (int start = 0; start < n_; start += bs) {
      const int len = std::min(bs, n_ - start);
      propose_weight_block(blk, synth_vec, perm.data() + start, len, adapting);
    }
  }

  void propose_weight_block(AdaptiveBlock& blk, bool synth_vec, const int* idx,
                            int len, bool adapting) {
    Eigen::VectorXd& vec = synth_vec ? synth_ : w_;
    const double scale = blk.scale();
    prop_idx_.assign(idx, idx + len);
    prop_delta_.resize(len);
    for (int i = 0; i < len; ++i)
      prop_delta_[i] = scale * wprop_sd_[idx[i]] * rng_.normal();

    // proposed full vector (for exact prior recomputation)
    prop_vec_ = vec;
    for (int i = 0; i < len; ++i) prop_vec_[prop_idx_[i]] += prop_delta_[i];

    // which surfaces see this vector?
    const bool touches_s1 = !synth_vec;
    const bool touches_s2 =
        kind_ == FitKind::joint_ans || (synth_vec && kind_ == FitKind::joint_prs);

    double ll1 = loglik1_, ll2 = loglik2_;
    bool ok = true;
    if (!cfg_.prior_only) {
      if (touches_s1) ok = surface_block_loglik(s1_, ll1);
      if (ok && touches_s2 && kind_ != FitKind::single)
        ok = surface_block_loglik_s2(synth_vec, ll2);
    }

    double lp_new = 0.0;
    WeightPrior prior_new;
    if (ok) {
      prior_new.refresh(prop_vec_, fem_.G, fem_.C);
      if (!synth_vec) {
        lp_new = gmrf_logpdf(n_, logdet_Q_, prior_new.quad(hp_.kappa2), hp_.xi2);
      } else if (kind_ == FitKind::joint_ans) {
        lp_new = gmrf_logpdf(n_, logdet_Q_, prior_new.quad(hp_.kappa2), sigma2_);
      } else {
        lp_new = gmrf_logpdf(n_, logdet_Q_, prior_new.quad(hp_.kappa2), hp_.xi2);
      }
    }

    bool accepted = false;
    if (ok) {
      const double lp_old = synth_vec ? lp_synth_ : lp_w_;
      const double delta = (ll1 + ll2 + lp_new) - (loglik1_ + loglik2_ + lp_old);
      if (accept(delta)) {
        accepted = true;
        vec = prop_vec_;
        if (!cfg_.prior_only) {
          if (touches_s1) commit_block(s1_, vec);
          if (touches_s2 && kind_ != FitKind::single) commit_block_s2();
        }
        loglik1_ = ll1;
        loglik2_ = ll2;
        if (synth_vec) {
          lp_synth_ = lp_new;
          psynth_ = prior_new;
        } else {
          lp_w_ = lp_new;
          pw_ = prior_new;
        }
      }
    }
    tally(blk, accepted, adapting);
  }

  // Candidate surface log likelihood when nodes prop_idx_ of `new_weights`
  // change; exact recomputation of the changed node terms and point terms,
  // with full sums over substituted arrays.
  double substituted_loglik(Surface& s, const Eigen::VectorXd& new_weights) {
    ++s.epoch;
    const int len = static_cast<int>(prop_idx_.size());
    s.cand_t.resize(len);
    s.cand_exp.resize(len);
    for (int i = 0; i < len; ++i) {
      const int j = prop_idx_[i];
      s.node_mark[j] = s.epoch;
      s.node_slot[j] = i;
      s.cand_t[i] = s.node_base[j] + s.Xbeta_node[j] + new_weights[j];
      if (s.cand_t[i] > kMaxNodeLogTerm) return std::numeric_limits<double>::quiet_NaN();
      s.cand_exp[i] = std::exp(s.cand_t[i]);
    }
    double sum_exp = 0.0;
    for (int i = 0; i < static_cast<int>(s.exp_t.size()); ++i)
      sum_exp += (s.node_mark[i] == s.epoch) ? s.cand_exp[s.node_slot[i]] : s.exp_t[i];

    // affected points: recompute from scratch
    s.cand_pts.clear();
    s.cand_q.clear();
    for (int i = 0; i < len; ++i) {
      for (int pt : s.pts_of_vertex[prop_idx_[i]]) {
        if (s.pt_mark[pt] == s.epoch) continue;
        s.pt_mark[pt] = s.epoch;
        s.pt_slot[pt] = static_cast<int>(s.cand_pts.size());
        const Basis& b = s.pts->basis[pt];
        double eta = 0.0;
        for (int m = 0; m < 3; ++m) eta += b.weight[m] * new_weights[b.index[m]];
        s.cand_pts.push_back(pt);
        s.cand_q.push_back(s.pt_base[pt] + s.Xbeta_pts[pt] + eta);
      }
    }
    double sum_q = 0.0;
    for (int k = 0; k < static_cast<int>(s.q.size()); ++k)
      sum_q += (s.pt_mark[k] == s.epoch) ? s.cand_q[s.pt_slot[k]] : s.q[k];
    return sum_q - sum_exp;
  }

  bool surface_block_loglik(Surface& s, double& ll) {
    ll = substituted_loglik(s, prop_vec_);
    return std::isfinite(ll);
  }

  bool surface_block_loglik_s2(bool synth_vec, double& ll) {
    if (kind_ == FitKind::joint_ans)
      prop_vec2_ = synth_vec ? Eigen::VectorXd(w_ + prop_vec_)
                             : Eigen::VectorXd(prop_vec_ + synth_);
    ll = substituted_loglik(s2_, kind_ == FitKind::joint_ans ? prop_vec2_ : prop_vec_);
    return std::isfinite(ll);
  }

  void commit_block(Surface& s, const Eigen::VectorXd& new_weights) {
    for (size_t i = 0; i < prop_idx_.size(); ++i) {
      const int j = prop_idx_[i];
      s.weights[j] = new_weights[j];
      s.t[j] = s.cand_t[i];
      s.exp_t[j] = s.cand_exp[i];
    }
    for (size_t m = 0; m < s.cand_pts.size(); ++m) s.q[s.cand_pts[m]] = s.cand_q[m];
  }

  void commit_block_s2() {
    const Eigen::VectorXd& vec2 =
        kind_ == FitKind::joint_ans ? prop_vec2_ : prop_vec_;
    for (size_t i = 0; i < prop_idx_.size(); ++i) {
      const int j = prop_idx_[i];
      s2_.weights[j] = vec2[j];
      s2_.t[j] = s2_.cand_t[i];
      s2_.exp_t[j] = s2_.cand_exp[i];
    }
    for (size_t m = 0; m < s2_.cand_pts.size(); ++m)
      s2_.q[s2_.cand_pts[m]] = s2_.cand_q[m];
  }

  // ---- hyperparameters ----
  void update_theta(bool adapting) {
    const double scale = blk_theta_.scale();
    const double t1 = th1_ + scale * rng_.normal();
    const double t2 = th2_ + scale * rng_.normal();
    bool accepted = false;
    const Hyperparams hp = prior_transform(t1, t2, prior_.log_rho0, prior_.log_sigma0);
    if (std::isfinite(hp.kappa2) && std::isfinite(hp.xi2) && hp.kappa2 > 1e-14 &&
        hp.kappa2 < 1e14 && hp.xi2 > 1e-300) {
      spde_.set_kappa2(hp.kappa2);
      const double logdet = spde_.logdet_Q();
      double lp_w_new = gmrf_logpdf(n_, logdet, pw_.quad(hp.kappa2), hp.xi2);
      double lp_synth_new = 0.0;
      if (kind_ == FitKind::joint_ans && sigma2_ > 0.0)
        lp_synth_new = gmrf_logpdf(n_, logdet, psynth_.quad(hp.kappa2), sigma2_);
      else if (kind_ == FitKind::joint_prs)
        lp_synth_new = gmrf_logpdf(n_, logdet, psynth_.quad(hp.kappa2), hp.xi2);
      const double lp_theta_new = theta_logpdf(t1, t2);
      const double delta = (lp_w_new + lp_synth_new + lp_theta_new) -
                           (lp_w_ + lp_synth_ + lp_theta_);
      if (accept(delta)) {
        accepted = true;
        th1_ = t1;
        th2_ = t2;
        hp_ = hp;
        logdet_Q_ = logdet;
        lp_w_ = lp_w_new;
        lp_synth_ = lp_synth_new;
        lp_theta_ = lp_theta_new;
      }
    }
    tally(blk_theta_, accepted, adapting);
  }

  FitKind kind_;
  const FemMatrices& fem_;
  PriorConfig prior_;
  McmcConfig cfg_;
  double sigma2_;
  Rng rng_;
  SpdePrecision spde_;

  int n_ = 0;
  NodeCache node_;
  PointCache pts1_, pts2_;
  Surface s1_, s2_;

  Eigen::VectorXd beta_, w_, synth_;
  Eigen::VectorXd wprop_sd_;
  double th1_ = 0.0, th2_ = 0.0;
  Hyperparams hp_;
  double logdet_Q_ = 0.0;

  WeightPrior pw_, psynth_;
  double loglik1_ = 0.0, loglik2_ = 0.0;
  double lp_w_ = 0.0, lp_synth_ = 0.0, lp_beta_ = 0.0, lp_theta_ = 0.0;

  AdaptiveBlock blk_beta_, blk_w_, blk_synth_, blk_theta_;
  int stuck_ = 0;

  std::vector<int> prop_idx_;
  std::vector<double> prop_delta_;
  Eigen::VectorXd prop_vec_, prop_vec2_;
};

uint64_t state_hash(uint64_t h, const ChainState& s) {
  for (int j = 0; j < s.beta.size(); ++j) h = hash_combine(h, s.beta[j]);
  for (int i = 0; i < s.w.size(); ++i) h = hash_combine(h, double(s.w[i]));
  h = hash_combine(h, s.th1);
  h = hash_combine(h, s.th2);
  return h;
}

}  // namespace

uint64_t PosteriorChain::hash() const {
  uint64_t h = hash_combine(0xcbf29ce484222325ull, meta.seed);
  h = hash_combine(h, meta.mesh_hash);
  for (const auto& s : samples) h = state_hash(h, s);
  return h;
}

uint64_t JointChain::hash() const {
  uint64_t h = hash_combine(0xcbf29ce484222325ull, meta.seed);
  h = hash_combine(h, meta.mesh_hash);
  h = hash_combine(h, sigma2);
  for (const auto& s : samples) {
    h = state_hash(h, s);
    for (int i = 0; i < s.synth.size(); ++i) h = hash_combine(h, double(s.synth[i]));
  }
  return h;
}

PosteriorChain fit_lgcp(const PointPattern& pattern, const TriMesh& mesh,
                        const FemMatrices& fem, CovariatePtr covs,
                        const PriorConfig& prior, const McmcConfig& config,
                        uint64_t seed) {
  Sampler sampler(FitKind::single, pattern, nullptr, 0.0, mesh, fem, covs, prior,
                  config, seed);
  PosteriorChain chain;
  chain.meta.seed = seed;
  chain.meta.mesh_hash = mesh_hash(mesh);
  sampler.run(chain.meta, &chain.samples, nullptr);
  return chain;
}

JointChain joint_fit_ans(const PointPattern& confidential,
                         const PointPattern& synthetic, double sigma2,
                         const TriMesh& mesh, const FemMatrices& fem,
                         CovariatePtr covs, const PriorConfig& prior,
                         const McmcConfig& config, uint64_t seed) {
  if (sigma2 < 0.0) throw ConfigError("joint_fit_ans: sigma2 must be >= 0");
  Sampler sampler(FitKind::joint_ans, confidential, &synthetic, sigma2, mesh, fem,
                  covs, prior, config, seed);
  JointChain chain;
  chain.mechanism = SynthMechanism::ans;
  chain.sigma2 = sigma2;
  chain.meta.seed = seed;
  chain.meta.mesh_hash = mesh_hash(mesh);
  if (sigma2 == 0.0)
    chain.meta.warnings.push_back(
        "sigma2 = 0: noise surface pinned to zero (degenerate prior)");
  sampler.run(chain.meta, nullptr, &chain.samples);
  return chain;
}

JointChain joint_fit_prs(const PointPattern& confidential,
                         const PointPattern& synthetic, const TriMesh& mesh,
                         const FemMatrices& fem, CovariatePtr covs,
                         const PriorConfig& prior, const McmcConfig& config,
                         uint64_t seed) {
  Sampler sampler(FitKind::joint_prs, confidential, &synthetic, 0.0, mesh, fem,
                  covs, prior, config, seed);
  JointChain chain;
  chain.mechanism = SynthMechanism::prs;
  chain.meta.seed = seed;
  chain.meta.mesh_hash = mesh_hash(mesh);
  sampler.run(chain.meta, nullptr, &chain.samples);
  return chain;
}

PosteriorMeans posterior_means(const PosteriorChain& chain) {
  if (chain.samples.empty()) throw ConfigError("posterior_means: empty chain");
  const int M = chain.n_samples();
  const auto& first = chain.samples.front();
  PosteriorMeans out;
  out.beta = Eigen::VectorXd::Zero(first.beta.size());
  out.w = Eigen::VectorXd::Zero(first.w.size());
  double k2 = 0.0, x2 = 0.0;
  for (const auto& s : chain.samples) {
    out.beta += s.beta;
    out.w += s.w.cast<double>();
    const Hyperparams hp = prior_transform(s.th1, s.th2, chain.meta.prior.log_rho0,
                                           chain.meta.prior.log_sigma0);
    k2 += hp.kappa2;
    x2 += hp.xi2;
  }
  out.beta /= M;
  out.w /= M;
  out.kappa2 = k2 / M;
  out.xi2 = x2 / M;
  return out;
}

namespace {

double quantile_sorted(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * (v.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - lo;
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

double beta_quantile(const PosteriorChain& chain, int component, double p) {
  if (chain.samples.empty()) throw ConfigError("beta_quantile: empty chain");
  std::vector<double> v;
  v.reserve(chain.samples.size());
  for (const auto& s : chain.samples) v.push_back(s.beta[component]);
  return quantile_sorted(std::move(v), p);
}

double beta_quantile(const JointChain& chain, int component, double p) {
  if (chain.samples.empty()) throw ConfigError("beta_quantile: empty chain");
  std::vector<double> v;
  v.reserve(chain.samples.size());
  for (const auto& s : chain.samples) v.push_back(s.beta[component]);
  return quantile_sorted(std::move(v), p);
}

}  // namespace lgcp
