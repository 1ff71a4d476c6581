#pragma once

#include <filesystem>
#include <optional>

#include "lgcpsynth/field.hpp"
#include "lgcpsynth/risk.hpp"
#include "lgcpsynth/utility.hpp"

namespace lgcp {

enum class PointFormat { csv, geojson };

struct LoadResult {
  PointPattern pattern;
  std::vector<int> rejected_rows;  // 0-based indices of out-of-domain rows
};

// CSV requires an `x,y` header (an optional third `w` column is ignored
// here); GeoJSON reads Point features. Units are meters. Out-of-domain rows
// are dropped and reported by index.
LoadResult load_points(const std::filesystem::path& path, PointFormat format,
                       const Rect& domain, const std::string& label = "");

void save_points_csv(const PointPattern& pattern, const std::filesystem::path& path);

struct WeightedPoints {
  std::vector<Point> points;
  std::vector<double> weights;  // all 1 when the source has no weight column
};

// CSV with header `x,y` or `x,y,w`.
WeightedPoints load_weighted_points(const std::filesystem::path& path);

// Isotropic Gaussian kernel density on the raster, rescaled so the raster
// integral equals total_population (persons; field unit persons/m^2).
ScalarField population_kde(const WeightedPoints& pop, double bandwidth,
                           const RasterSpec& spec, double total_population,
                           bool parallel = true);

// Euclidean distance to the anchor, standardized to mean 0 / sd 1 over the
// raster with the transform recorded on the field.
ScalarField distance_covariate(Point anchor, const RasterSpec& spec);

// log(max(pd, floor)) with the default 1e-12 persons/m^2 floor.
ScalarField log_field(const ScalarField& f, double floor_value = 1e-12);

// ---- release bundles ---------------------------------------------------

struct ReleaseManifest {
  int schema = 1;
  std::string mechanism;
  double radius = 0.0;       // radial parameter (0 when unused)
  double sigma2 = 0.0;       // ans parameter (0 when unused)
  double candidate_multiplier = 0.0;
  uint64_t mesh_hash = 0;
  uint64_t master_seed = 0;
  std::vector<std::pair<std::string, uint64_t>> step_seeds;
  std::vector<std::pair<std::string, std::string>> chain_hashes;
  std::optional<RiskReport> risk;
  std::optional<UtilityReport> utility;
};

// Writes <out_dir>/points.csv and <out_dir>/manifest.json. Refuses to write
// unless both the risk and utility reports are present: a release must be
// scored first.
std::filesystem::path save_release(const ReleaseManifest& manifest,
                                   const PointPattern& synthetic,
                                   const std::filesystem::path& out_dir);

struct LoadedRelease {
  ReleaseManifest manifest;
  PointPattern points;
};

LoadedRelease load_release(const std::filesystem::path& dir, const Rect& domain);

uint64_t manifest_hash(const ReleaseManifest& manifest);

}  // namespace lgcp
