#include "lgcpsynth/chain_io.hpp"

#include <fstream>

#include "json.hpp"

namespace lgcp {

namespace {

nlohmann::json meta_to_json(const ChainMeta& m, int n_beta, int n_w, bool joint,
                            const char* mechanism, double sigma2, size_t n_samples) {
  nlohmann::json j;
  j["schema"] = 1;
  j["kind"] = joint ? "joint" : "single";
  if (joint) {
    j["mechanism"] = mechanism;
    j["sigma2"] = sigma2;
  }
  j["n_samples"] = n_samples;
  j["n_beta"] = n_beta;
  j["n_w"] = n_w;
  j["total_iterations"] = m.total_iterations;
  j["burn_in"] = m.burn_in;
  j["thin"] = m.thin;
  j["seed"] = m.seed;
  j["mesh_hash"] = hash_hex(m.mesh_hash);
  j["warnings"] = m.warnings;
  auto& blocks = j["blocks"] = nlohmann::json::array();
  for (const auto& b : m.blocks)
    blocks.push_back({{"name", b.name},
                      {"acceptance_rate", b.acceptance_rate},
                      {"scale_end_burn_in", b.scale_end_burn_in},
                      {"scale_final", b.scale_final}});
  j["prior"] = {{"beta_var", m.prior.beta_var},
                {"sigma_theta", {m.prior.sigma_theta(0, 0), m.prior.sigma_theta(0, 1),
                                 m.prior.sigma_theta(1, 0), m.prior.sigma_theta(1, 1)}},
                {"log_rho0", m.prior.log_rho0},
                {"log_sigma0", m.prior.log_sigma0}};
  return j;
}

ChainMeta meta_from_json(const nlohmann::json& j) {
  ChainMeta m;
  m.total_iterations = j.at("total_iterations");
  m.burn_in = j.at("burn_in");
  m.thin = j.at("thin");
  m.seed = j.at("seed");
  m.mesh_hash = std::stoull(j.at("mesh_hash").get<std::string>(), nullptr, 16);
  m.warnings = j.at("warnings").get<std::vector<std::string>>();
  for (const auto& b : j.at("blocks")) {
    BlockStats st;
    st.name = b.at("name");
    st.acceptance_rate = b.at("acceptance_rate");
    st.scale_end_burn_in = b.at("scale_end_burn_in");
    st.scale_final = b.at("scale_final");
    m.blocks.push_back(std::move(st));
  }
  const auto& p = j.at("prior");
  m.prior.beta_var = p.at("beta_var");
  const auto& st = p.at("sigma_theta");
  m.prior.sigma_theta << st.at(0).get<double>(), st.at(1).get<double>(),
      st.at(2).get<double>(), st.at(3).get<double>();
  m.prior.log_rho0 = p.at("log_rho0");
  m.prior.log_sigma0 = p.at("log_sigma0");
  return m;
}

void write_doubles(std::ofstream& out, const double* p, size_t n) {
  out.write(reinterpret_cast<const char*>(p), n * sizeof(double));
}
void write_floats(std::ofstream& out, const float* p, size_t n) {
  out.write(reinterpret_cast<const char*>(p), n * sizeof(float));
}
void read_doubles(std::ifstream& in, double* p, size_t n) {
  if (!in.read(reinterpret_cast<char*>(p), n * sizeof(double)))
    throw ConfigError("load_chain: truncated record stream");
}
void read_floats(std::ifstream& in, float* p, size_t n) {
  if (!in.read(reinterpret_cast<char*>(p), n * sizeof(float)))
    throw ConfigError("load_chain: truncated record stream");
}

void save_states(const std::filesystem::path& stem, const nlohmann::json& header,
                 const std::vector<const ChainState*>& states,
                 const std::vector<const Eigen::VectorXf*>& synth) {
  std::ofstream hdr(stem.string() + ".json");
  if (!hdr) throw ConfigError("save_chain: cannot write header");
  hdr << header.dump(2) << "\n";
  std::ofstream bin(stem.string() + ".bin", std::ios::binary);
  if (!bin) throw ConfigError("save_chain: cannot write record stream");
  for (size_t i = 0; i < states.size(); ++i) {
    const ChainState& s = *states[i];
    write_doubles(bin, s.beta.data(), s.beta.size());
    const double th[2] = {s.th1, s.th2};
    write_doubles(bin, th, 2);
    write_floats(bin, s.w.data(), s.w.size());
    if (!synth.empty()) write_floats(bin, synth[i]->data(), synth[i]->size());
  }
}

}  // namespace

void save_chain(const PosteriorChain& chain, const std::filesystem::path& stem) {
  const int d = chain.samples.empty() ? 0 : int(chain.samples[0].beta.size());
  const int n = chain.samples.empty() ? 0 : int(chain.samples[0].w.size());
  std::vector<const ChainState*> states;
  for (const auto& s : chain.samples) states.push_back(&s);
  save_states(stem, meta_to_json(chain.meta, d, n, false, "", 0.0, states.size()),
              states, {});
}

void save_chain(const JointChain& chain, const std::filesystem::path& stem) {
  const int d = chain.samples.empty() ? 0 : int(chain.samples[0].beta.size());
  const int n = chain.samples.empty() ? 0 : int(chain.samples[0].w.size());
  std::vector<const ChainState*> states;
  std::vector<const Eigen::VectorXf*> synth;
  for (const auto& s : chain.samples) {
    states.push_back(&s);
    synth.push_back(&s.synth);
  }
  save_states(stem,
              meta_to_json(chain.meta, d, n, true, mechanism_name(chain.mechanism),
                           chain.sigma2, states.size()),
              states, synth);
}

namespace {

nlohmann::json read_header(const std::filesystem::path& stem, const char* kind) {
  std::ifstream hdr(stem.string() + ".json");
  if (!hdr) throw ConfigError("load_chain: cannot read header for " + stem.string());
  nlohmann::json j;
  hdr >> j;
  if (j.at("kind") != kind)
    throw ConfigError("load_chain: expected a " + std::string(kind) + " chain");
  return j;
}

}  // namespace

PosteriorChain load_chain(const std::filesystem::path& stem) {
  const nlohmann::json j = read_header(stem, "single");
  PosteriorChain chain;
  chain.meta = meta_from_json(j);
  const size_t M = j.at("n_samples");
  const int d = j.at("n_beta");
  const int n = j.at("n_w");
  std::ifstream bin(stem.string() + ".bin", std::ios::binary);
  if (!bin) throw ConfigError("load_chain: cannot read record stream");
  chain.samples.resize(M);
  for (auto& s : chain.samples) {
    s.beta.resize(d);
    read_doubles(bin, s.beta.data(), d);
    double th[2];
    read_doubles(bin, th, 2);
    s.th1 = th[0];
    s.th2 = th[1];
    s.w.resize(n);
    read_floats(bin, s.w.data(), n);
  }
  return chain;
}

JointChain load_joint_chain(const std::filesystem::path& stem) {
  const nlohmann::json j = read_header(stem, "joint");
  JointChain chain;
  chain.meta = meta_from_json(j);
  chain.mechanism = mechanism_from_name(j.at("mechanism"));
  chain.sigma2 = j.at("sigma2");
  const size_t M = j.at("n_samples");
  const int d = j.at("n_beta");
  const int n = j.at("n_w");
  std::ifstream bin(stem.string() + ".bin", std::ios::binary);
  if (!bin) throw ConfigError("load_chain: cannot read record stream");
  chain.samples.resize(M);
  for (auto& s : chain.samples) {
    s.beta.resize(d);
    read_doubles(bin, s.beta.data(), d);
    double th[2];
    read_doubles(bin, th, 2);
    s.th1 = th[0];
    s.th2 = th[1];
    s.w.resize(n);
    read_floats(bin, s.w.data(), n);
    s.synth.resize(n);
    read_floats(bin, s.synth.data(), n);
  }
  return chain;
}

void export_chain_csv(const PosteriorChain& chain, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("export_chain_csv: cannot write " + path.string());
  const int d = chain.samples.empty() ? 0 : int(chain.samples[0].beta.size());
  out << "sample";
  for (int j = 0; j < d; ++j) out << ",beta" << j;
  out << ",theta1,theta2,kappa2,xi2\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (int i = 0; i < chain.n_samples(); ++i) {
    const auto& s = chain.samples[i];
    out << i;
    for (int j = 0; j < d; ++j) out << ',' << num(s.beta[j]);
    const Hyperparams hp = prior_transform(s.th1, s.th2, chain.meta.prior.log_rho0,
                                           chain.meta.prior.log_sigma0);
    out << ',' << num(s.th1) << ',' << num(s.th2) << ',' << num(hp.kappa2) << ','
        << num(hp.xi2) << "\n";
  }
}

}  // namespace lgcp
