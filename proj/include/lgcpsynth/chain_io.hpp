#pragma once

#include <filesystem>

#include "lgcpsynth/mcmc.hpp"

namespace lgcp {

// Chain persistence: a JSON header next to a little-endian binary record
// stream (beta and theta as doubles, weights as float32). Paths are the stem;
// `<stem>.json` and `<stem>.bin` are written.
void save_chain(const PosteriorChain& chain, const std::filesystem::path& stem);
void save_chain(const JointChain& chain, const std::filesystem::path& stem);

PosteriorChain load_chain(const std::filesystem::path& stem);
JointChain load_joint_chain(const std::filesystem::path& stem);

// Flat CSV of the scalar trace (beta components, theta, derived kappa2/xi2).
void export_chain_csv(const PosteriorChain& chain, const std::filesystem::path& path);

}  // namespace lgcp
