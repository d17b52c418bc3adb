#pragma once

#include <iosfwd>
#include <string>

#include "pexsurv/mcmc.hpp"

namespace pexsurv {

/// One column per monitored scalar, one row per retained iteration; values
/// printed with 17 significant digits so they re-read bit-exactly.
void write_chain_csv(std::ostream& out, const ChainStore& chain);

/// Reads the draws back; metadata is left default.
ChainStore read_chain_csv(std::istream& in);

/// Metadata sidecar: chain id, seed, family, full config and a `timings`
/// object. Everything outside `timings` is a pure function of the inputs.
std::string chain_metadata_json(const ChainStore& chain);

/// Config echo shared by the chain sidecar and the run manifest.
std::string config_json(const McmcConfig& config);

}  // namespace pexsurv
