#include "lgcpsynth/utility.hpp"

#include <cmath>

namespace lgcp {

namespace {

// p = 1 / (1 + exp(log lambda_dagger(y) - log lambda(y) + log I - log I_dagger))
double classification_prob_logs(double log_lam, double log_lam_dagger,
                                double log_int, double log_int_dagger) {
  const double z = log_lam_dagger - log_lam + log_int - log_int_dagger;
  if (!std::isfinite(z)) throw NumericError("classification_prob: non-finite log ratio");
  if (z > 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

}  // namespace

double classification_prob(const IntensityField& lambda,
                           const IntensityField& lambda_dagger, Point y,
                           const TriMesh& mesh, const FemMatrices& fem) {
  const double log_lam = log_intensity_at(lambda, mesh, y);
  const double log_lam_d = log_intensity_at(lambda_dagger, mesh, y);
  const double log_int = std::log(integrate_intensity(lambda, mesh, fem));
  const double log_int_d = std::log(integrate_intensity(lambda_dagger, mesh, fem));
  return classification_prob_logs(log_lam, log_lam_d, log_int, log_int_d);
}

double expected_correct(const std::vector<double>& p_l, int x_k) {
  if (p_l.empty()) throw ConfigError("expected_correct: no paired samples");
  if (x_k != 0 && x_k != 1) throw ConfigError("expected_correct: membership must be 0 or 1");
  double sum = 0.0;
  for (double p : p_l) sum += x_k == 1 ? p : 1.0 - p;
  return sum / p_l.size();
}

UtilityReport pmse(const PosteriorChain& chain_S, const PosteriorChain& chain_Sdagger,
                   const PointPattern& S, const PointPattern& S_dagger,
                   const TriMesh& mesh, const FemMatrices& fem, CovariatePtr covs,
                   bool parallel) {
  if (!covs) throw ConfigError("pmse: covariates missing");
  if (S.n() != S_dagger.n())
    throw ConfigError("pmse: confidential and synthetic patterns differ in size");
  const uint64_t mh = mesh_hash(mesh);
  if (chain_S.meta.mesh_hash != mh || chain_Sdagger.meta.mesh_hash != mh)
    throw ConfigError("pmse: chain/mesh mismatch");
  const int L = std::min(chain_S.n_samples(), chain_Sdagger.n_samples());
  if (L < 1) throw ConfigError("pmse: empty chain");

  const NodeCache node = build_node_cache(mesh, fem, *covs);
  std::vector<double> log_int_S(L), log_int_Sd(L);
  for (int l = 0; l < L; ++l) {
    const auto& a = chain_S.samples[l];
    const auto& b = chain_Sdagger.samples[l];
    log_int_S[l] = log_integral_cached(node, a.beta, a.w.cast<double>());
    log_int_Sd[l] = log_integral_cached(node, b.beta, b.w.cast<double>());
  }

  const int N = S.n();
  const int total = 2 * N;
  std::vector<double> phat(total);

#pragma omp parallel for schedule(static) if (parallel)
  for (int k = 0; k < total; ++k) {
    const bool confidential = k < N;
    const Point y = confidential ? S.points[k] : S_dagger.points[k - N];
    const LocalEval e = local_eval(mesh, *covs, y);

    double sum = 0.0;
    for (int l = 0; l < L; ++l) {
      const auto& a = chain_S.samples[l];
      const auto& b = chain_Sdagger.samples[l];
      double eta_a = 0.0, eta_b = 0.0;
      for (int i = 0; i < 3; ++i) {
        eta_a += e.basis.weight[i] * static_cast<double>(a.w[e.basis.index[i]]);
        eta_b += e.basis.weight[i] * static_cast<double>(b.w[e.basis.index[i]]);
      }
      const double log_lam = e.base + e.x.dot(a.beta) + eta_a;
      const double log_lam_d = e.base + e.x.dot(b.beta) + eta_b;
      const double p =
          classification_prob_logs(log_lam, log_lam_d, log_int_S[l], log_int_Sd[l]);
      sum += confidential ? p : 1.0 - p;
    }
    phat[k] = sum / L;
  }

  UtilityReport report;
  report.per_point_phat = std::move(phat);
  report.L = L;
  report.chain_hash_S = chain_S.hash();
  report.chain_hash_Sdagger = chain_Sdagger.hash();
  double acc = 0.0;
  for (double p : report.per_point_phat) acc += (p - 0.5) * (p - 0.5);
  report.pmse = acc / total;
  return report;
}

}  // namespace lgcp
