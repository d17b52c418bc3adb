#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pexsurv/dataset.hpp"
#include "pexsurv/diagnostics.hpp"
#include "pexsurv/mcmc.hpp"
#include "pexsurv/model.hpp"

namespace pexsurv::app {

enum ExitCode : int { kOk = 0, kValidationError = 2, kRuntimeError = 3 };

/// Full command-line entry point; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct FitOptions {
  Family family = Family::simple;
  std::string data = "kidney";  // path, or "kidney" for the bundled data
  int m = 10;
  std::string grid = "equal";   // "equal" or an explicit comma list
  McmcConfig mcmc;
  double mass = 0.95;
  std::filesystem::path out_dir = "fit_out";
};

struct FitResult {
  SurvivalDataset data;
  ModelSpec spec;
  std::vector<ChainStore> chains;
  std::vector<Summary> summary;
};

/// Ingests data, samples, writes summary.csv, summary.txt, chain_<k>.csv,
/// chain_<k>.json and manifest.json into out_dir.
FitResult run_fit(const FitOptions& options, std::ostream& log);

struct Scenario {
  std::string name;
  std::vector<double> grid;
  std::vector<double> rates;
};

/// s1 increasing, s2 constant, s3 decreasing rates on the grid {0, 2, 3, 5}.
Scenario scenario(const std::string& name);

struct SimulateOptions {
  std::string scenario = "s1";
  int n = 1000;
  int reps = 100;
  std::uint64_t seed = 1;
  McmcConfig mcmc;  // defaults: 2 chains, 1000 burn-in, 2000 draws, slice rate updates
  double mass = 0.95;
  std::filesystem::path out_dir = "simulate_out";

  SimulateOptions() { mcmc.rate_update = RateUpdate::slice; }
};

struct ReplicationResult {
  int rep = 0;
  std::uint64_t seed = 0;
  std::vector<Summary> rates;  // lambda[1..m]
  std::vector<bool> covered;
  double sampling_seconds = 0.0;
};

/// Runs the replications and writes replications.csv, aggregate.csv,
/// timings.csv and manifest.json into out_dir.
std::vector<ReplicationResult> run_simulate(const SimulateOptions& options, std::ostream& log);

/// Fits one generated replication; exposed for tests.
ReplicationResult simulate_replication(const Scenario& sc, int n, int rep, std::uint64_t seed,
                                       const McmcConfig& mcmc, double mass);

}  // namespace pexsurv::app
