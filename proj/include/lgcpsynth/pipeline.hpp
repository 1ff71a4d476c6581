#pragma once

#include <map>

#include "lgcpsynth/chain_io.hpp"
#include "lgcpsynth/data_io.hpp"
#include "lgcpsynth/synthesis.hpp"

namespace lgcp {

struct CovariateSpec {
  std::string name;
  std::string type;  // "distance" or "raster"
  Point anchor{};    // distance covariates
  std::filesystem::path raster_path;  // raster covariates (ESRI ASCII)
};

struct PopulationSpec {
  std::filesystem::path points_path;  // empty -> uniform offset pd == 1
  double total = 0.0;
  double bandwidth = 0.0;
};

struct PipelineConfig {
  uint64_t seed = 1;
  std::filesystem::path points_path;
  PointFormat format = PointFormat::csv;
  Rect domain;
  PopulationSpec population;
  std::vector<CovariateSpec> covariates;
  double raster_cell = 0.0;  // 0 -> mesh spacing
  double mesh_spacing = 0.0;
  double mesh_extension = -1.0;  // <0 -> 10% of the larger domain side
  PriorConfig prior;
  McmcConfig mcmc;
  McmcConfig joint_mcmc;  // defaults to mcmc when absent
  RiskConfig risk;
  std::vector<SynthesisSpec> synthesis_grid;
  double candidate_multiplier = 100.0;
  double max_risk_ceiling = 0.0;
  double pmse_ceiling = 0.0;
  int row_workers = 1;

  void validate_for_sweep() const;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct Dataset {
  PointPattern points;
  std::vector<int> rejected_rows;
  TriMesh mesh;
  FemMatrices fem;
  CovariatePtr covs;
};

Dataset load_dataset(const PipelineConfig& config);

// fit -> chain + summary; returns the chain stem path.
std::filesystem::path run_fit(const PipelineConfig& config,
                              const std::filesystem::path& out_dir);

struct RowResult {
  SynthesisSpec spec;
  std::string tag;
  bool failed = false;
  std::string error;
  PointPattern synthetic;
  RiskReport risk;
  UtilityReport utility;
  std::vector<std::pair<std::string, uint64_t>> seeds;
  std::vector<std::pair<std::string, std::string>> chain_hashes;
};

// Scores one synthesis spec end to end against an existing confidential fit:
// generate (or accept) the synthetic pattern, run the mechanism's joint or
// marginal fits, and compute the risk report and pMSE.
RowResult score_synthesis(const Dataset& data, const PosteriorChain& base_chain,
                          const SynthesisSpec& spec, const PipelineConfig& config,
                          const PointPattern* synthetic_override = nullptr,
                          bool parallel = true);

// sweep -> frontier.csv + frontier.json + per-row artifacts under rows/.
std::filesystem::path run_sweep(const PipelineConfig& config,
                                const std::filesystem::path& out_dir);

// release <tag> -> release bundle for a previously swept row; refuses when a
// ceiling is violated.
std::filesystem::path run_release(const PipelineConfig& config,
                                  const std::filesystem::path& out_dir,
                                  const std::string& row_tag);

}  // namespace lgcp
