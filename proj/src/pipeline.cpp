#include "lgcpsynth/pipeline.hpp"

#include <fstream>

#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lgcp {

namespace {

McmcConfig mcmc_from_json(const nlohmann::json& j, McmcConfig base) {
  if (j.contains("iterations")) base.iterations = j.at("iterations");
  if (j.contains("burn_in")) base.burn_in = j.at("burn_in");
  if (j.contains("thin")) base.thin = j.at("thin");
  if (j.contains("w_block")) base.w_block = j.at("w_block");
  if (j.contains("adapt_batch")) base.adapt_batch = j.at("adapt_batch");
  if (j.contains("prior_only")) base.prior_only = j.at("prior_only");
  if (j.contains("fix_theta")) base.fix_theta = j.at("fix_theta");
  if (j.contains("init_theta1")) base.init_theta1 = j.at("init_theta1");
  if (j.contains("init_theta2")) base.init_theta2 = j.at("init_theta2");
  return base;
}

}  // namespace

void PipelineConfig::validate_for_sweep() const {
  if (synthesis_grid.empty()) throw ConfigError("config: synthesis grid is empty");
  if (!(max_risk_ceiling > 0.0) || !(pmse_ceiling > 0.0))
    throw ConfigError("config: acceptance thresholds must be positive");
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config: bad JSON in " + path.string() + ": " + e.what());
  }

  PipelineConfig cfg;
  cfg.seed = j.value("seed", uint64_t{1});

  const auto& data = j.at("data");
  cfg.points_path = path.parent_path() / data.at("points").get<std::string>();
  const std::string fmt = data.value("format", std::string("csv"));
  if (fmt == "csv")
    cfg.format = PointFormat::csv;
  else if (fmt == "geojson")
    cfg.format = PointFormat::geojson;
  else
    throw ConfigError("config: unknown point format '" + fmt + "'");
  const auto& dom = data.at("domain");
  cfg.domain = Rect{dom.at(0), dom.at(1), dom.at(2), dom.at(3)};
  if (data.contains("population")) {
    const auto& pop = data.at("population");
    if (pop.contains("points"))
      cfg.population.points_path =
          path.parent_path() / pop.at("points").get<std::string>();
    cfg.population.total = pop.value("total", 0.0);
    cfg.population.bandwidth = pop.value("bandwidth", 0.0);
  }
  if (data.contains("covariates")) {
    for (const auto& c : data.at("covariates")) {
      CovariateSpec spec;
      spec.name = c.value("name", std::string("covariate"));
      spec.type = c.at("type");
      if (spec.type == "distance") {
        spec.anchor = {c.at("anchor").at(0), c.at("anchor").at(1)};
      } else if (spec.type == "raster") {
        spec.raster_path = path.parent_path() / c.at("path").get<std::string>();
      } else {
        throw ConfigError("config: unknown covariate type '" + spec.type + "'");
      }
      cfg.covariates.push_back(std::move(spec));
    }
  }
  cfg.raster_cell = data.value("raster_cell", 0.0);

  const auto& mesh = j.at("mesh");
  cfg.mesh_spacing = mesh.at("spacing");
  cfg.mesh_extension = mesh.value("extension", -1.0);

  if (j.contains("prior")) {
    const auto& p = j.at("prior");
    cfg.prior.beta_var = p.value("beta_var", 2.0);
    if (p.contains("sigma_theta")) {
      const auto& st = p.at("sigma_theta");
      cfg.prior.sigma_theta << st.at(0).get<double>(), st.at(1).get<double>(),
          st.at(2).get<double>(), st.at(3).get<double>();
    }
    cfg.prior.log_rho0 = p.value("log_rho0", 0.0);
    cfg.prior.log_sigma0 = p.value("log_sigma0", 0.0);
  }

  if (j.contains("mcmc")) cfg.mcmc = mcmc_from_json(j.at("mcmc"), McmcConfig{});
  cfg.joint_mcmc =
      j.contains("joint_mcmc") ? mcmc_from_json(j.at("joint_mcmc"), cfg.mcmc) : cfg.mcmc;

  if (j.contains("risk")) {
    const auto& r = j.at("risk");
    cfg.risk.r = r.value("r", 50.0);
    cfg.risk.M_quad = r.value("M_quad", 10000);
    cfg.risk.norm_refine = r.value("norm_refine", 1);
    cfg.risk.sample_stride = r.value("sample_stride", 1);
  }

  if (j.contains("synthesis")) {
    const auto& syn = j.at("synthesis");
    cfg.candidate_multiplier = syn.value("candidate_multiplier", 100.0);
    if (syn.contains("grid")) {
      for (const auto& g : syn.at("grid")) {
        SynthesisSpec spec;
        spec.mechanism = mechanism_from_name(g.at("mechanism"));
        spec.radius = g.value("r", 0.0);
        spec.sigma2 = g.value("sigma2", 0.0);
        spec.candidate_multiplier = cfg.candidate_multiplier;
        const int count = g.value("count", 1);
        if (count < 1) throw ConfigError("config: grid row count must be >= 1");
        for (int rep = 0; rep < count; ++rep) {
          spec.replicate = rep;
          spec.validate();
          cfg.synthesis_grid.push_back(spec);
        }
      }
    }
  }

  if (j.contains("thresholds")) {
    cfg.max_risk_ceiling = j.at("thresholds").value("max_risk_ceiling", 0.0);
    cfg.pmse_ceiling = j.at("thresholds").value("pmse_ceiling", 0.0);
  }
  cfg.row_workers = j.value("row_workers", 1);
  return cfg;
}

Dataset load_dataset(const PipelineConfig& config) {
  Dataset data;
  const double ext = config.mesh_extension >= 0.0
                         ? config.mesh_extension
                         : 0.1 * std::max(config.domain.width(), config.domain.height());
  data.mesh = build_mesh(config.domain, config.mesh_spacing, ext);
  data.fem = assemble_fem(data.mesh);

  LoadResult loaded =
      load_points(config.points_path, config.format, config.domain);
  data.points = std::move(loaded.pattern);
  data.rejected_rows = std::move(loaded.rejected_rows);

  const double cell = config.raster_cell > 0.0 ? config.raster_cell : data.mesh.spacing;
  const RasterSpec spec = RasterSpec::covering(data.mesh.extent, cell);

  auto covs = std::make_shared<CovariateSet>();
  if (!config.population.points_path.empty()) {
    if (!(config.population.total > 0.0) || !(config.population.bandwidth > 0.0))
      throw ConfigError("config: population requires total > 0 and bandwidth > 0");
    const WeightedPoints pop = load_weighted_points(config.population.points_path);
    covs->log_pd = log_field(population_kde(pop, config.population.bandwidth, spec,
                                            config.population.total));
  } else {
    covs->log_pd = constant_field(spec, 0.0);  // pd == 1
  }
  for (const auto& cspec : config.covariates) {
    if (cspec.type == "distance") {
      covs->covariates.push_back(distance_covariate(cspec.anchor, spec));
    } else {
      ScalarField f = read_esri_ascii(cspec.raster_path);
      if (!f.covers(data.mesh.extent))
        throw ConfigError("config: covariate raster '" + cspec.name +
                          "' does not cover the mesh extent");
      const double mean = f.values.mean();
      const double sd =
          std::sqrt((f.values.array() - mean).square().sum() / f.values.size());
      if (!(sd > 0.0)) throw ConfigError("config: constant covariate raster");
      f.values = (f.values.array() - mean) / sd;
      f.standardize_mean = mean;
      f.standardize_sd = sd;
      covs->covariates.push_back(std::move(f));
    }
  }
  data.covs = covs;
  return data;
}

namespace {

nlohmann::json fit_summary_json(const PosteriorChain& chain, const Dataset& data,
                                const PipelineConfig& config, uint64_t fit_seed) {
  const PosteriorMeans means = posterior_means(chain);
  nlohmann::json j;
  j["n_points"] = data.points.n();
  j["rejected_rows"] = data.rejected_rows;
  j["seed"] = fit_seed;
  j["master_seed"] = config.seed;
  j["chain_hash"] = hash_hex(chain.hash());
  j["mesh_hash"] = hash_hex(chain.meta.mesh_hash);
  auto& beta = j["beta"] = nlohmann::json::array();
  for (int c = 0; c < means.beta.size(); ++c) {
    nlohmann::json b;
    b["mean"] = means.beta[c];
    b["ci95"] = {beta_quantile(chain, c, 0.025), beta_quantile(chain, c, 0.975)};
    if (c > 0) {
      const ScalarField& f = data.covs->covariates[c - 1];
      b["name"] = config.covariates[c - 1].name;
      b["standardize_mean"] = f.standardize_mean;
      b["standardize_sd"] = f.standardize_sd;
    } else {
      b["name"] = "intercept";
    }
    beta.push_back(std::move(b));
  }
  const Hyperparams hp{means.kappa2, means.xi2};
  j["kappa2"] = means.kappa2;
  j["xi2"] = means.xi2;
  j["effective_range"] = hp.rho();
  j["marginal_variance"] = hp.sigma2();
  j["warnings"] = chain.meta.warnings;
  auto& blocks = j["blocks"] = nlohmann::json::array();
  for (const auto& b : chain.meta.blocks)
    blocks.push_back({{"name", b.name}, {"acceptance_rate", b.acceptance_rate}});
  return j;
}

}  // namespace

std::filesystem::path run_fit(const PipelineConfig& config,
                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const Dataset data = load_dataset(config);
  const uint64_t fit_seed = derive_seed(config.seed, "fit");
  const PosteriorChain chain = fit_lgcp(data.points, data.mesh, data.fem, data.covs,
                                        config.prior, config.mcmc, fit_seed);
  save_mesh_json(data.mesh, out_dir / "mesh.json");
  const auto stem = out_dir / "chain";
  save_chain(chain, stem);
  std::ofstream out(out_dir / "fit_summary.json");
  out << fit_summary_json(chain, data, config, fit_seed).dump(2) << "\n";
  return stem;
}

RowResult score_synthesis(const Dataset& data, const PosteriorChain& base_chain,
                          const SynthesisSpec& spec, const PipelineConfig& config,
                          const PointPattern* synthetic_override, bool parallel) {
  spec.validate();
  RowResult row;
  row.spec = spec;
  row.tag = spec.tag();
  row.chain_hashes.emplace_back("confidential", hash_hex(base_chain.hash()));

  const uint64_t synth_seed = derive_seed(config.seed, "synth/" + row.tag);
  const uint64_t fit_seed = derive_seed(config.seed, "fit_synth/" + row.tag);
  const uint64_t joint_seed = derive_seed(config.seed, "joint/" + row.tag);
  row.seeds.emplace_back("synth", synth_seed);
  row.seeds.emplace_back("fit_synth", fit_seed);

  // synthetic pattern
  if (synthetic_override) {
    row.synthetic = *synthetic_override;
  } else if (spec.mechanism == SynthMechanism::radial) {
    row.synthetic = radial_synthesize(data.points, spec.radius, synth_seed);
  } else {
    const PosteriorMeans means = posterior_means(base_chain);
    const IntensityField surface =
        spec.mechanism == SynthMechanism::ans
            ? ans_intensity(means, spec.sigma2, data.covs, data.mesh, data.fem,
                            synth_seed)
            : prs_intensity(means, data.covs, data.mesh, data.fem, synth_seed);
    row.synthetic =
        sample_pattern(surface, data.points.n(), spec.candidate_multiplier,
                       data.mesh, data.points.domain, derive_seed(synth_seed, "pattern"));
  }

  // risk
  if (spec.mechanism == SynthMechanism::radial) {
    row.risk = max_disclosure_risk_radial(base_chain, data.points, row.synthetic,
                                          spec.radius, data.mesh, data.fem,
                                          data.covs, config.risk, parallel);
  } else {
    row.seeds.emplace_back("joint", joint_seed);
    const JointChain joint =
        spec.mechanism == SynthMechanism::ans
            ? joint_fit_ans(data.points, row.synthetic, spec.sigma2, data.mesh,
                            data.fem, data.covs, config.prior, config.joint_mcmc,
                            joint_seed)
            : joint_fit_prs(data.points, row.synthetic, data.mesh, data.fem,
                            data.covs, config.prior, config.joint_mcmc, joint_seed);
    row.chain_hashes.emplace_back("joint", hash_hex(joint.hash()));
    row.risk = max_disclosure_risk_joint(joint, data.points, data.mesh, data.fem,
                                         data.covs, config.risk, parallel);
  }

  // utility: the synthetic chain is fit blind to the confidential data
  const PosteriorChain chain_synth =
      fit_lgcp(row.synthetic, data.mesh, data.fem, data.covs, config.prior,
               config.mcmc, fit_seed);
  row.chain_hashes.emplace_back("synthetic", hash_hex(chain_synth.hash()));
  row.utility = pmse(base_chain, chain_synth, data.points, row.synthetic, data.mesh,
                     data.fem, data.covs, parallel);
  return row;
}

namespace {

nlohmann::json row_to_json(const RowResult& row) {
  nlohmann::json j;
  j["tag"] = row.tag;
  j["mechanism"] = mechanism_name(row.spec.mechanism);
  j["r"] = row.spec.radius;
  j["sigma2"] = row.spec.sigma2;
  j["replicate"] = row.spec.replicate;
  j["candidate_multiplier"] = row.spec.candidate_multiplier;
  j["failed"] = row.failed;
  if (row.failed) {
    j["error"] = row.error;
    return j;
  }
  j["max_risk"] = row.risk.max_risk;
  j["pmse"] = row.utility.pmse;
  auto& seeds = j["seeds"] = nlohmann::json::object();
  for (const auto& [k, v] : row.seeds) seeds[k] = v;
  auto& hashes = j["chain_hashes"] = nlohmann::json::object();
  for (const auto& [k, v] : row.chain_hashes) hashes[k] = v;
  return j;
}

double row_param(const RowResult& row) {
  switch (row.spec.mechanism) {
    case SynthMechanism::radial: return row.spec.radius;
    case SynthMechanism::ans: return row.spec.sigma2;
    case SynthMechanism::prs: return double(row.spec.replicate);
  }
  return 0.0;
}

}  // namespace

std::filesystem::path run_sweep(const PipelineConfig& config,
                                const std::filesystem::path& out_dir) {
  config.validate_for_sweep();
  const auto chain_stem = out_dir / "chain";
  if (!std::filesystem::exists(chain_stem.string() + ".json"))
    throw ConfigError("sweep: no fitted chain at " + chain_stem.string() +
                      ".json (run fit first)");
  const Dataset data = load_dataset(config);
  const PosteriorChain base_chain = load_chain(chain_stem);
  if (base_chain.meta.mesh_hash != mesh_hash(data.mesh))
    throw ConfigError("sweep: chain mesh does not match the configured mesh");

  const int n_rows = static_cast<int>(config.synthesis_grid.size());
  std::vector<RowResult> rows(n_rows);
  const bool parallel_rows = config.row_workers > 1;

#pragma omp parallel for schedule(dynamic) num_threads(config.row_workers) \
    if (parallel_rows)
  for (int i = 0; i < n_rows; ++i) {
    const SynthesisSpec& spec = config.synthesis_grid[i];
    try {
      rows[i] = score_synthesis(data, base_chain, spec, config, nullptr,
                                /*parallel=*/!parallel_rows);
    } catch (const std::exception& e) {
      rows[i].spec = spec;
      rows[i].tag = spec.tag();
      rows[i].failed = true;
      rows[i].error = e.what();
    }
  }

  std::filesystem::create_directories(out_dir / "rows");
  std::ofstream csv(out_dir / "frontier.csv");
  csv << "mechanism,param,max_risk,pmse,seed,tag,status\n";
  nlohmann::json plot;
  plot["rows"] = nlohmann::json::array();
  char buf[256];
  for (const auto& row : rows) {
    const auto row_dir = out_dir / "rows" / row.tag;
    std::filesystem::create_directories(row_dir);
    std::ofstream meta(row_dir / "row.json");
    meta << row_to_json(row).dump(2) << "\n";
    if (!row.failed) {
      save_points_csv(row.synthetic, row_dir / "points.csv");
      save_risk_csv(row.risk, data.points, row_dir / "risk.csv");
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%llu,%s,ok\n",
                    mechanism_name(row.spec.mechanism), row_param(row),
                    row.risk.max_risk, row.utility.pmse,
                    static_cast<unsigned long long>(derive_seed(
                        config.seed, "synth/" + row.tag)),
                    row.tag.c_str());
      csv << buf;
    } else {
      std::snprintf(buf, sizeof buf, "%s,%.17g,,,,%s,failed\n",
                    mechanism_name(row.spec.mechanism), row_param(row),
                    row.tag.c_str());
      csv << buf;
    }
    plot["rows"].push_back(row_to_json(row));
  }
  std::ofstream pj(out_dir / "frontier.json");
  pj << plot.dump(2) << "\n";
  return out_dir / "frontier.csv";
}

std::filesystem::path run_release(const PipelineConfig& config,
                                  const std::filesystem::path& out_dir,
                                  const std::string& row_tag) {
  config.validate_for_sweep();
  const auto row_dir = out_dir / "rows" / row_tag;
  std::ifstream meta_in(row_dir / "row.json");
  if (!meta_in)
    throw ConfigError("release: unknown sweep row '" + row_tag + "'");
  nlohmann::json row;
  meta_in >> row;
  if (row.value("failed", true))
    throw ConfigError("release: row '" + row_tag + "' failed during the sweep");

  const double max_risk = row.at("max_risk");
  const double pm = row.at("pmse");
  if (max_risk > config.max_risk_ceiling) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "release refused: max_risk %.6g exceeds ceiling %.6g", max_risk,
                  config.max_risk_ceiling);
    throw ReleaseRefused(buf);
  }
  if (pm > config.pmse_ceiling) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "release refused: pmse %.6g exceeds ceiling %.6g",
                  pm, config.pmse_ceiling);
    throw ReleaseRefused(buf);
  }

  const Dataset data = load_dataset(config);
  const PosteriorChain base_chain = load_chain(out_dir / "chain");
  // Re-derive the row deterministically so the released bundle carries full
  // scored reports, not just the frontier numbers.
  SynthesisSpec spec;
  spec.mechanism = mechanism_from_name(row.at("mechanism"));
  spec.radius = row.at("r");
  spec.sigma2 = row.at("sigma2");
  spec.replicate = row.at("replicate");
  spec.candidate_multiplier = row.at("candidate_multiplier");
  const RowResult scored = score_synthesis(data, base_chain, spec, config);

  ReleaseManifest manifest;
  manifest.mechanism = mechanism_name(spec.mechanism);
  manifest.radius = spec.radius;
  manifest.sigma2 = spec.sigma2;
  manifest.candidate_multiplier = spec.candidate_multiplier;
  manifest.mesh_hash = mesh_hash(data.mesh);
  manifest.master_seed = config.seed;
  manifest.step_seeds = scored.seeds;
  manifest.chain_hashes = scored.chain_hashes;
  manifest.risk = scored.risk;
  manifest.utility = scored.utility;
  return save_release(manifest, scored.synthetic, out_dir / ("release_" + row_tag));
}

}  // namespace lgcp
