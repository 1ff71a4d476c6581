#include "lgcpsynth/data_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lgcp {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& cell, int line_no) {
  try {
    size_t used = 0;
    const double v = std::stod(cell, &used);
    if (trim(cell.substr(used)).empty() && std::isfinite(v)) return v;
  } catch (...) {
  }
  throw ConfigError("parse error at line " + std::to_string(line_no) +
                    ": bad number '" + cell + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

struct CsvPoints {
  std::vector<Point> points;
  std::vector<double> weights;
  bool has_weights = false;
};

CsvPoints read_csv_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_points: cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("load_points: empty file " + path.string());
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "x" || header[1] != "y" ||
      (header.size() == 3 && header[2] != "w") || header.size() > 3)
    throw ConfigError("load_points: expected header 'x,y' or 'x,y,w' in " +
                      path.string());
  CsvPoints out;
  out.has_weights = header.size() == 3;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ConfigError("parse error at line " + std::to_string(line_no) +
                        ": expected " + std::to_string(header.size()) + " columns");
    Point p{parse_number(cells[0], line_no), parse_number(cells[1], line_no)};
    out.points.push_back(p);
    out.weights.push_back(out.has_weights ? parse_number(cells[2], line_no) : 1.0);
  }
  return out;
}

std::vector<Point> read_geojson_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_points: cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("load_points: bad GeoJSON in " + path.string() + ": " + e.what());
  }
  std::vector<Point> pts;
  auto add_geometry = [&](const nlohmann::json& geom) {
    if (geom.value("type", "") != "Point") return;
    const auto& c = geom.at("coordinates");
    pts.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
  };
  if (j.value("type", "") == "FeatureCollection") {
    for (const auto& f : j.at("features")) add_geometry(f.at("geometry"));
  } else if (j.value("type", "") == "Point") {
    add_geometry(j);
  } else {
    throw ConfigError("load_points: no Point features in " + path.string());
  }
  return pts;
}

}  // namespace

LoadResult load_points(const std::filesystem::path& path, PointFormat format,
                       const Rect& domain, const std::string& label) {
  std::vector<Point> raw = format == PointFormat::csv
                               ? read_csv_points(path).points
                               : read_geojson_points(path);
  LoadResult out;
  out.pattern.domain = domain;
  out.pattern.label = label.empty() ? path.filename().string() : label;
  for (size_t i = 0; i < raw.size(); ++i) {
    if (domain.contains(raw[i]))
      out.pattern.points.push_back(raw[i]);
    else
      out.rejected_rows.push_back(static_cast<int>(i));
  }
  return out;
}

void save_points_csv(const PointPattern& pattern, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_points_csv: cannot write " + path.string());
  out << "x,y\n";
  char buf[80];
  for (const Point& p : pattern.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x, p.y);
    out << buf;
  }
}

WeightedPoints load_weighted_points(const std::filesystem::path& path) {
  const CsvPoints csv = read_csv_points(path);
  return {csv.points, csv.weights};
}

ScalarField population_kde(const WeightedPoints& pop, double bandwidth,
                           const RasterSpec& spec, double total_population,
                           bool parallel) {
  if (!(bandwidth > 0.0)) throw ConfigError("population_kde: bandwidth must be > 0");
  if (pop.points.empty()) throw ConfigError("population_kde: no population points");
  if (!(total_population > 0.0))
    throw ConfigError("population_kde: total population must be > 0");

  ScalarField f = constant_field(spec, 0.0);
  const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const long cells = static_cast<long>(spec.nrows) * spec.ncols;

#pragma omp parallel for schedule(static) if (parallel)
  for (long c = 0; c < cells; ++c) {
    const int row = static_cast<int>(c / spec.ncols);
    const int col = static_cast<int>(c % spec.ncols);
    const Point center = f.cell_center(row, col);
    double v = 0.0;
    for (size_t i = 0; i < pop.points.size(); ++i) {
      const double dx = center.x - pop.points[i].x;
      const double dy = center.y - pop.points[i].y;
      v += pop.weights[i] * std::exp(-(dx * dx + dy * dy) * inv2h2);
    }
    f.values(row, col) = v;
  }

  const double mass = f.integral();
  if (!(mass > 0.0)) throw NumericError("population_kde: zero total mass");
  f.values *= total_population / mass;
  return f;
}

ScalarField distance_covariate(Point anchor, const RasterSpec& spec) {
  ScalarField f = constant_field(spec, 0.0);
  for (int r = 0; r < spec.nrows; ++r)
    for (int c = 0; c < spec.ncols; ++c)
      f.values(r, c) = dist(f.cell_center(r, c), anchor);

  const double mean = f.values.mean();
  const double sd =
      std::sqrt((f.values.array() - mean).square().sum() / f.values.size());
  if (!(sd > 0.0)) throw NumericError("distance_covariate: degenerate raster");
  f.values = (f.values.array() - mean) / sd;
  f.standardize_mean = mean;
  f.standardize_sd = sd;
  return f;
}

ScalarField log_field(const ScalarField& f, double floor_value) {
  ScalarField out = f;
  out.values = f.values.array().max(floor_value).log();
  return out;
}

namespace {

nlohmann::json risk_to_json(const RiskReport& r) {
  nlohmann::json j;
  j["max_risk"] = r.max_risk;
  j["r"] = r.r;
  j["mechanism"] = r.mechanism;
  j["M_quad"] = r.M_quad;
  j["chain_hash"] = hash_hex(r.chain_hash);
  j["per_location_risk"] = r.per_location_risk;
  return j;
}

RiskReport risk_from_json(const nlohmann::json& j) {
  RiskReport r;
  r.max_risk = j.at("max_risk");
  r.r = j.at("r");
  r.mechanism = j.at("mechanism");
  r.M_quad = j.at("M_quad");
  r.chain_hash = std::stoull(j.at("chain_hash").get<std::string>(), nullptr, 16);
  r.per_location_risk = j.at("per_location_risk").get<std::vector<double>>();
  return r;
}

nlohmann::json utility_to_json(const UtilityReport& u) {
  nlohmann::json j;
  j["pmse"] = u.pmse;
  j["L"] = u.L;
  j["chain_hash_S"] = hash_hex(u.chain_hash_S);
  j["chain_hash_Sdagger"] = hash_hex(u.chain_hash_Sdagger);
  j["per_point_phat"] = u.per_point_phat;
  return j;
}

UtilityReport utility_from_json(const nlohmann::json& j) {
  UtilityReport u;
  u.pmse = j.at("pmse");
  u.L = j.at("L");
  u.chain_hash_S = std::stoull(j.at("chain_hash_S").get<std::string>(), nullptr, 16);
  u.chain_hash_Sdagger =
      std::stoull(j.at("chain_hash_Sdagger").get<std::string>(), nullptr, 16);
  u.per_point_phat = j.at("per_point_phat").get<std::vector<double>>();
  return u;
}

nlohmann::json manifest_to_json(const ReleaseManifest& m) {
  nlohmann::json j;
  j["schema"] = m.schema;
  j["mechanism"] = m.mechanism;
  j["radius"] = m.radius;
  j["sigma2"] = m.sigma2;
  j["candidate_multiplier"] = m.candidate_multiplier;
  j["mesh_hash"] = hash_hex(m.mesh_hash);
  j["master_seed"] = m.master_seed;
  auto& seeds = j["step_seeds"] = nlohmann::json::object();
  for (const auto& [k, v] : m.step_seeds) seeds[k] = v;
  auto& hashes = j["chain_hashes"] = nlohmann::json::object();
  for (const auto& [k, v] : m.chain_hashes) hashes[k] = v;
  if (m.risk) j["risk"] = risk_to_json(*m.risk);
  if (m.utility) j["utility"] = utility_to_json(*m.utility);
  return j;
}

}  // namespace

std::filesystem::path save_release(const ReleaseManifest& manifest,
                                   const PointPattern& synthetic,
                                   const std::filesystem::path& out_dir) {
  if (!manifest.risk || !manifest.utility)
    throw ConfigError(
        "save_release: refusing to write an unscored release (risk and "
        "utility reports are required)");
  std::filesystem::create_directories(out_dir);
  save_points_csv(synthetic, out_dir / "points.csv");
  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw ConfigError("save_release: cannot write manifest");
  out << manifest_to_json(manifest).dump(2) << "\n";
  return out_dir;
}

LoadedRelease load_release(const std::filesystem::path& dir, const Rect& domain) {
  LoadedRelease out;
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ConfigError("load_release: missing manifest in " + dir.string());
  nlohmann::json j;
  in >> j;
  ReleaseManifest& m = out.manifest;
  m.schema = j.at("schema");
  if (m.schema != 1) throw ConfigError("load_release: unsupported schema");
  m.mechanism = j.at("mechanism");
  m.radius = j.at("radius");
  m.sigma2 = j.at("sigma2");
  m.candidate_multiplier = j.at("candidate_multiplier");
  m.mesh_hash = std::stoull(j.at("mesh_hash").get<std::string>(), nullptr, 16);
  m.master_seed = j.at("master_seed");
  for (const auto& [k, v] : j.at("step_seeds").items())
    m.step_seeds.emplace_back(k, v.get<uint64_t>());
  for (const auto& [k, v] : j.at("chain_hashes").items())
    m.chain_hashes.emplace_back(k, v.get<std::string>());
  if (j.contains("risk")) m.risk = risk_from_json(j.at("risk"));
  if (j.contains("utility")) m.utility = utility_from_json(j.at("utility"));
  const LoadResult pts = load_points(dir / "points.csv", PointFormat::csv, domain);
  if (!pts.rejected_rows.empty())
    throw ConfigError("load_release: release points fall outside the domain");
  out.points = pts.pattern;
  return out;
}

uint64_t manifest_hash(const ReleaseManifest& m) {
  const std::string s = manifest_to_json(m).dump();
  return fnv1a64(s.data(), s.size());
}

}  // namespace lgcp
