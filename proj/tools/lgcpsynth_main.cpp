// Command-line driver for the fit -> synthesize -> score -> release workflow.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lgcpsynth/pipeline.hpp"

namespace fs = std::filesystem;
using namespace lgcp;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  uint64_t seed = 0;
  bool seed_set = false;
};

PipelineConfig load_config(const CommonOpts& opts) {
  if (opts.config_path.empty()) throw ConfigError("--config is required");
  PipelineConfig cfg = load_pipeline_config(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "pipeline config JSON");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "master seed override")
      ->each([&](const std::string&) { opts.seed_set = true; });
}

int dispatch(const std::string& name, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ReleaseRefused& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    std::cerr << name << ": numeric error: " << e.what() << "\n";
    return 3;
  } catch (const OutOfDomainError& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << name << ": config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LGCP-based synthetic location data with risk and utility scoring"};
  app.require_subcommand(1);

  CommonOpts opts;

  auto* cmd_mesh = app.add_subcommand("mesh", "build the mesh and write mesh.json");
  add_common(cmd_mesh, opts);

  auto* cmd_fit = app.add_subcommand("fit", "fit the confidential pattern");
  add_common(cmd_fit, opts);

  auto* cmd_synth = app.add_subcommand("synth", "generate one synthetic pattern");
  add_common(cmd_synth, opts);
  std::string mechanism = "prs";
  double synth_r = 0.0, synth_sigma2 = 0.0;
  int replicate = 0;
  cmd_synth->add_option("--mechanism", mechanism, "radial | ans | prs");
  cmd_synth->add_option("--r", synth_r, "radial radius (m)");
  cmd_synth->add_option("--sigma2", synth_sigma2, "ans noise level");
  cmd_synth->add_option("--rep", replicate, "replicate index");

  auto* cmd_risk = app.add_subcommand("risk", "score disclosure risk of a release");
  add_common(cmd_risk, opts);
  std::string points_path;
  cmd_risk->add_option("--mechanism", mechanism, "radial | ans | prs");
  cmd_risk->add_option("--r", synth_r, "radial radius (m)");
  cmd_risk->add_option("--sigma2", synth_sigma2, "ans noise level");
  cmd_risk->add_option("--points", points_path, "synthetic points CSV")->required();

  auto* cmd_utility = app.add_subcommand("utility", "score utility (pMSE) of a release");
  add_common(cmd_utility, opts);
  bool per_point = false;
  cmd_utility->add_option("--points", points_path, "synthetic points CSV")->required();
  cmd_utility->add_flag("--per-point", per_point, "also emit per-point propensities CSV");

  auto* cmd_sweep = app.add_subcommand("sweep", "score the whole synthesis grid");
  add_common(cmd_sweep, opts);

  auto* cmd_release = app.add_subcommand("release", "release a swept row");
  add_common(cmd_release, opts);
  std::string row_tag;
  cmd_release->add_option("--row", row_tag, "sweep row tag")->required();

  auto* cmd_chain = app.add_subcommand("chain", "chain utilities");
  auto* cmd_export = cmd_chain->add_subcommand("export", "export a chain trace");
  std::string chain_stem, csv_out;
  cmd_export->add_option("--chain", chain_stem, "chain stem (without .json/.bin)")
      ->required();
  cmd_export->add_option("--csv", csv_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  if (cmd_mesh->parsed())
    return dispatch("mesh", [&] {
      const PipelineConfig cfg = load_config(opts);
      const Dataset data = load_dataset(cfg);
      fs::create_directories(opts.out_dir);
      save_mesh_json(data.mesh, fs::path(opts.out_dir) / "mesh.json");
      std::cout << "mesh: " << data.mesh.n() << " vertices, "
                << data.mesh.triangles.size() << " triangles\n";
    });

  if (cmd_fit->parsed())
    return dispatch("fit", [&] {
      const PipelineConfig cfg = load_config(opts);
      const auto stem = run_fit(cfg, opts.out_dir);
      std::cout << "chain written to " << stem << ".{json,bin}\n";
    });

  if (cmd_synth->parsed())
    return dispatch("synth", [&] {
      const PipelineConfig cfg = load_config(opts);
      const Dataset data = load_dataset(cfg);
      const PosteriorChain chain = load_chain(fs::path(opts.out_dir) / "chain");
      SynthesisSpec spec;
      spec.mechanism = mechanism_from_name(mechanism);
      spec.radius = synth_r;
      spec.sigma2 = synth_sigma2;
      spec.replicate = replicate;
      spec.candidate_multiplier = cfg.candidate_multiplier;
      spec.validate();
      const uint64_t seed = derive_seed(cfg.seed, "synth/" + spec.tag());
      PointPattern synthetic;
      if (spec.mechanism == SynthMechanism::radial) {
        synthetic = radial_synthesize(data.points, spec.radius, seed);
      } else {
        const PosteriorMeans means = posterior_means(chain);
        const IntensityField surface =
            spec.mechanism == SynthMechanism::ans
                ? ans_intensity(means, spec.sigma2, data.covs, data.mesh, data.fem, seed)
                : prs_intensity(means, data.covs, data.mesh, data.fem, seed);
        synthetic = sample_pattern(surface, data.points.n(), spec.candidate_multiplier,
                                   data.mesh, data.points.domain,
                                   derive_seed(seed, "pattern"));
      }
      const auto out = fs::path(opts.out_dir) / (spec.tag() + ".csv");
      save_points_csv(synthetic, out);
      std::cout << "synthetic pattern written to " << out << "\n";
    });

  if (cmd_risk->parsed())
    return dispatch("risk", [&] {
      const PipelineConfig cfg = load_config(opts);
      const Dataset data = load_dataset(cfg);
      const PosteriorChain chain = load_chain(fs::path(opts.out_dir) / "chain");
      const LoadResult synth =
          load_points(points_path, PointFormat::csv, cfg.domain);
      if (!synth.rejected_rows.empty())
        throw ConfigError("risk: synthetic points outside the domain");
      const SynthMechanism mech = mechanism_from_name(mechanism);
      RiskReport report;
      if (mech == SynthMechanism::radial) {
        if (!(synth_r > 0.0)) throw ConfigError("risk: radial needs --r > 0");
        report = max_disclosure_risk_radial(chain, data.points, synth.pattern,
                                            synth_r, data.mesh, data.fem, data.covs,
                                            cfg.risk);
      } else {
        const uint64_t seed = derive_seed(cfg.seed, "joint/risk_cmd");
        const JointChain joint =
            mech == SynthMechanism::ans
                ? joint_fit_ans(data.points, synth.pattern, synth_sigma2, data.mesh,
                                data.fem, data.covs, cfg.prior, cfg.joint_mcmc, seed)
                : joint_fit_prs(data.points, synth.pattern, data.mesh, data.fem,
                                data.covs, cfg.prior, cfg.joint_mcmc, seed);
        report = max_disclosure_risk_joint(joint, data.points, data.mesh, data.fem,
                                           data.covs, cfg.risk);
      }
      fs::create_directories(opts.out_dir);
      save_risk_csv(report, data.points, fs::path(opts.out_dir) / "risk.csv");
      nlohmann::json j;
      j["mechanism"] = report.mechanism;
      j["max_risk"] = report.max_risk;
      j["r"] = report.r;
      j["M_quad"] = report.M_quad;
      j["chain_hash"] = hash_hex(report.chain_hash);
      std::ofstream out(fs::path(opts.out_dir) / "risk.json");
      out << j.dump(2) << "\n";
      std::cout << "max disclosure risk: " << report.max_risk << "\n";
    });

  if (cmd_utility->parsed())
    return dispatch("utility", [&] {
      const PipelineConfig cfg = load_config(opts);
      const Dataset data = load_dataset(cfg);
      const PosteriorChain chain = load_chain(fs::path(opts.out_dir) / "chain");
      const LoadResult synth = load_points(points_path, PointFormat::csv, cfg.domain);
      if (!synth.rejected_rows.empty())
        throw ConfigError("utility: synthetic points outside the domain");
      const uint64_t seed = derive_seed(cfg.seed, "fit_synth/utility_cmd");
      const PosteriorChain chain_synth =
          fit_lgcp(synth.pattern, data.mesh, data.fem, data.covs, cfg.prior,
                   cfg.mcmc, seed);
      const UtilityReport report = pmse(chain, chain_synth, data.points,
                                        synth.pattern, data.mesh, data.fem, data.covs);
      fs::create_directories(opts.out_dir);
      nlohmann::json j;
      j["pmse"] = report.pmse;
      j["L"] = report.L;
      j["chain_hash_S"] = hash_hex(report.chain_hash_S);
      j["chain_hash_Sdagger"] = hash_hex(report.chain_hash_Sdagger);
      std::ofstream out(fs::path(opts.out_dir) / "utility.json");
      out << j.dump(2) << "\n";
      if (per_point) {
        std::ofstream pp(fs::path(opts.out_dir) / "utility_per_point.csv");
        pp << "index,phat\n";
        for (size_t k = 0; k < report.per_point_phat.size(); ++k)
          pp << k << ',' << report.per_point_phat[k] << "\n";
      }
      std::cout << "pMSE: " << report.pmse << "\n";
    });

  if (cmd_sweep->parsed())
    return dispatch("sweep", [&] {
      const PipelineConfig cfg = load_config(opts);
      const auto csv = run_sweep(cfg, opts.out_dir);
      std::cout << "frontier written to " << csv << "\n";
    });

  if (cmd_release->parsed())
    return dispatch("release", [&] {
      const PipelineConfig cfg = load_config(opts);
      const auto dir = run_release(cfg, opts.out_dir, row_tag);
      std::cout << "release bundle written to " << dir << "\n";
    });

  if (cmd_export->parsed())
    return dispatch("chain export", [&] {
      const PosteriorChain chain = load_chain(chain_stem);
      export_chain_csv(chain, csv_out);
      std::cout << "trace written to " << csv_out << "\n";
    });

  std::cerr << "no subcommand\n";
  return 2;
}
