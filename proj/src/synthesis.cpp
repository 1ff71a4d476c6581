#include "lgcpsynth/synthesis.hpp"

#include <algorithm>
#include <cmath>

namespace lgcp {

void SynthesisSpec::validate() const {
  if (mechanism == SynthMechanism::radial && !(radius > 0.0))
    throw ConfigError("synthesis: radial mechanism requires radius > 0");
  if (mechanism == SynthMechanism::ans && sigma2 < 0.0)
    throw ConfigError("synthesis: ans noise level must be >= 0");
  if (candidate_multiplier < 10.0)
    throw ConfigError("synthesis: candidate_multiplier must be >= 10");
}

std::string SynthesisSpec::tag() const {
  char buf[64];
  switch (mechanism) {
    case SynthMechanism::radial:
      std::snprintf(buf, sizeof buf, "radial_r%g_rep%d", radius, replicate);
      break;
    case SynthMechanism::ans:
      std::snprintf(buf, sizeof buf, "ans_s%g_rep%d", sigma2, replicate);
      break;
    case SynthMechanism::prs:
      std::snprintf(buf, sizeof buf, "prs_rep%d", replicate);
      break;
  }
  return buf;
}

PointPattern radial_synthesize(const PointPattern& pattern, double r, uint64_t seed) {
  if (!(r > 0.0)) throw ConfigError("radial_synthesize: radius must be > 0");
  constexpr int kResampleCap = 1000000;
  Rng rng(seed);
  PointPattern out;
  out.domain = pattern.domain;
  out.label = pattern.label + " (radial r=" + std::to_string(r) + ")";
  out.points.reserve(pattern.points.size());
  for (const Point& s : pattern.points) {
    Point cand;
    int tries = 0;
    do {
      if (++tries > kResampleCap)
        throw NumericError("radial_synthesize: resample cap reached for a point");
      const double rad = r * std::sqrt(rng.uniform01());
      const double ang = 2.0 * M_PI * rng.uniform01();
      cand = {s.x + rad * std::cos(ang), s.y + rad * std::sin(ang)};
    } while (!pattern.domain.contains(cand));
    out.points.push_back(cand);
  }
  return out;
}

IntensityField ans_intensity(const PosteriorMeans& fit, double sigma2,
                             CovariatePtr covs, const TriMesh& mesh,
                             const FemMatrices& fem, uint64_t seed) {
  if (sigma2 < 0.0) throw ConfigError("ans_intensity: sigma2 must be >= 0");
  IntensityField field;
  field.beta = fit.beta;
  field.covs = std::move(covs);
  if (sigma2 == 0.0) {
    field.w = fit.w;  // the plug-in surface, bit-exactly
    return field;
  }
  SpdePrecision spde(fem, fit.kappa2);
  Rng rng(seed);
  field.w = fit.w + spde.sample(sigma2, rng);
  (void)mesh;
  return field;
}

IntensityField prs_intensity(const PosteriorMeans& fit, CovariatePtr covs,
                             const TriMesh& mesh, const FemMatrices& fem,
                             uint64_t seed) {
  IntensityField field;
  field.beta = fit.beta;
  field.covs = std::move(covs);
  SpdePrecision spde(fem, fit.kappa2);
  Rng rng(seed);
  field.w = spde.sample(fit.xi2, rng);
  (void)mesh;
  return field;
}

PointPattern sample_pattern(const IntensityField& field, int N,
                            double candidate_multiplier, const TriMesh& mesh,
                            const Rect& domain, uint64_t seed) {
  if (N < 1) throw ConfigError("sample_pattern: N must be >= 1");
  const long n_cand = std::lround(candidate_multiplier * N);
  if (n_cand < N) throw ConfigError("sample_pattern: candidate count below N");

  Rng rng(seed);
  std::vector<Point> cand(n_cand);
  std::vector<double> log_lambda(n_cand);
  double max_log = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < n_cand; ++i) {
    cand[i] = {rng.uniform(domain.xmin, domain.xmax),
               rng.uniform(domain.ymin, domain.ymax)};
    log_lambda[i] = log_intensity_at(field, mesh, cand[i]);
    max_log = std::max(max_log, log_lambda[i]);
  }

  // Exponential-keys sampling without replacement: take the N smallest
  // Exp(1)/weight keys. Keys are invariant to a common weight scale, so the
  // weights are exponentiated relative to their maximum.
  std::vector<std::pair<double, long>> keys(n_cand);
  for (long i = 0; i < n_cand; ++i) {
    const double w = std::exp(log_lambda[i] - max_log);
    const double e = rng.exponential();
    keys[i] = {w > 0.0 ? e / w : std::numeric_limits<double>::infinity(), i};
  }
  std::partial_sort(keys.begin(), keys.begin() + N, keys.end());

  PointPattern out;
  out.domain = domain;
  out.label = "synthetic";
  out.points.reserve(N);
  for (int k = 0; k < N; ++k) out.points.push_back(cand[keys[k].second]);
  return out;
}

}  // namespace lgcp
