#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "pexsurv/chain_io.hpp"
#include "pexsurv/errors.hpp"
#include "pexsurv/pex.hpp"
#include "pexsurv/random.hpp"

#ifndef PEXSURV_VERSION
#define PEXSURV_VERSION "unknown"
#endif

namespace pexsurv::app {
namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::ordered_json;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || *end != '\0') throw InvalidParamsError("not a number list: '" + text + "'");
    out.push_back(v);
  }
  return out;
}

// -- dist -------------------------------------------------------------------

struct DistArgs {
  std::vector<double> grid;
  std::vector<double> rates;
  double t = 0.0;
  double p = 0.0;
  int n = 0;
  std::optional<std::uint64_t> seed;
  std::optional<double> lower;
  std::optional<double> upper;
  std::string out;
};

std::optional<PEParams> checked_params(const DistArgs& a, std::ostream& err) {
  const auto report = validate_params(a.grid, a.rates);
  if (!report.ok()) {
    err << "invalid distribution parameters:\n" << report.to_string();
    return std::nullopt;
  }
  return PEParams(TimeGrid(a.grid), a.rates);
}

int dist_eval(const DistArgs& a, std::ostream& out, std::ostream& err) {
  const auto params = checked_params(a, err);
  if (!params) return kValidationError;
  out << fmt::format("t {:.10g}\n", a.t);
  out << fmt::format("pdf {:.10g}\n", params->density(a.t));
  out << fmt::format("cdf {:.10g}\n", params->cdf(a.t));
  out << fmt::format("survival {:.10g}\n", params->survival(a.t));
  out << fmt::format("hazard {:.10g}\n", params->hazard(a.t));
  out << fmt::format("cum_hazard {:.10g}\n", params->cum_hazard(a.t));
  return kOk;
}

int dist_quantile(const DistArgs& a, std::ostream& out, std::ostream& err) {
  const auto params = checked_params(a, err);
  if (!params) return kValidationError;
  out << fmt::format("{:.10g}\n", params->quantile(a.p));
  return kOk;
}

int dist_sample(const DistArgs& a, std::ostream& out, std::ostream& err) {
  const auto params = checked_params(a, err);
  if (!params) return kValidationError;
  if (!a.seed) {
    err << "--seed is required for sampling\n";
    return kValidationError;
  }
  Rng rng(*a.seed);
  const TruncationBounds bounds{a.lower, a.upper};
  std::ostringstream buf;
  for (int i = 0; i < a.n; ++i) buf << fmt::format("{:.17g}\n", params->sample(rng, bounds));
  if (a.out.empty()) {
    out << buf.str();
  } else {
    write_text(a.out, buf.str());
  }
  return kOk;
}

// -- fit ----------------------------------------------------------------------

SurvivalDataset load_data(const std::string& source) {
  return source == "kidney" ? kidney_dataset() : read_dataset_file(source);
}

TimeGrid build_grid(const std::string& grid, int m, const SurvivalDataset& data) {
  if (grid == "equal") {
    const double top = data.max_event_time() > 0.0 ? data.max_event_time() : data.max_observed_time();
    return default_grid(top, m);
  }
  return TimeGrid(parse_number_list(grid));
}

json manifest_base(const std::string& command) {
  json j;
  j["command"] = command;
  j["version"] = PEXSURV_VERSION;
  return j;
}

void add_mcmc_options(CLI::App* cmd, McmcConfig& c, std::string& rate_update) {
  cmd->add_option("--chains", c.n_chains, "Number of chains")->check(CLI::PositiveNumber);
  cmd->add_option("--burnin", c.burn_in, "Burn-in iterations")->check(CLI::NonNegativeNumber);
  cmd->add_option("--iters", c.n_iter, "Post burn-in iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--thin", c.thin, "Thinning interval")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "Seed; chain k uses seed + k");
  cmd->add_option("--slice-width", c.slice.width, "Slice sampler bracket width");
  cmd->add_option("--slice-max-steps", c.slice.max_steps, "Slice sampler stepping-out cap");
  cmd->add_option("--rate-update", rate_update, "Rate update for the simple model")
      ->check(CLI::IsMember({"conjugate", "slice"}));
}

RateUpdate parse_rate_update(const std::string& s) {
  return s == "slice" ? RateUpdate::slice : RateUpdate::conjugate;
}

}  // namespace

FitResult run_fit(const FitOptions& o, std::ostream& log) {
  const auto start = Clock::now();
  FitResult result;
  result.data = load_data(o.data);
  result.spec.family = o.family;
  result.spec.grid = build_grid(o.grid, o.m, result.data);
  result.spec.hyper.validate(result.data.num_covariates());
  const double ingest_seconds = seconds_since(start);

  result.chains = run_chains(result.spec, result.data, o.mcmc);
  result.summary = summarize(result.chains, o.mass);

  std::filesystem::create_directories(o.out_dir);
  json outputs = json::array();
  {
    std::ostringstream csv;
    write_summary_csv(csv, result.summary);
    write_text(o.out_dir / "summary.csv", csv.str());
    write_text(o.out_dir / "summary.txt", format_summary_table(result.summary));
    outputs.push_back("summary.csv");
    outputs.push_back("summary.txt");
  }
  json sampling = json::array();
  json seeds = json::array();
  for (const auto& chain : result.chains) {
    const std::string stem = "chain_" + std::to_string(chain.meta.chain_id + 1);
    std::ostringstream csv;
    write_chain_csv(csv, chain);
    write_text(o.out_dir / (stem + ".csv"), csv.str());
    auto meta = json::parse(chain_metadata_json(chain));
    meta["manifest"] = "manifest.json";
    write_text(o.out_dir / (stem + ".json"), meta.dump(2) + "\n");
    outputs.push_back(stem + ".csv");
    outputs.push_back(stem + ".json");
    sampling.push_back(chain.meta.wall_seconds);
    seeds.push_back(chain.meta.seed);
  }

  json manifest = manifest_base("fit");
  manifest["model"] = std::string(to_string(o.family));
  manifest["data"] = o.data;
  manifest["records"] = result.data.size();
  manifest["grid"] = std::vector<double>(result.spec.grid.cut_points().begin(),
                                         result.spec.grid.cut_points().end());
  manifest["hpd_mass"] = o.mass;
  manifest["mcmc"] = json::parse(config_json(o.mcmc));
  manifest["seeds"] = seeds;
  manifest["outputs"] = outputs;
  manifest["timings"] = {{"ingest_seconds", ingest_seconds},
                         {"sampling_seconds", sampling},
                         {"total_seconds", seconds_since(start)}};
  write_text(o.out_dir / "manifest.json", manifest.dump(2) + "\n");

  log << format_summary_table(result.summary);
  return result;
}

// -- simulate -----------------------------------------------------------------

Scenario scenario(const std::string& name) {
  const std::vector<double> grid{0.0, 2.0, 3.0, 5.0};
  if (name == "s1") return {name, grid, {0.3, 0.6, 0.8, 1.3}};
  if (name == "s2") return {name, grid, {0.7, 0.7, 0.7, 0.7}};
  if (name == "s3") return {name, grid, {1.3, 0.8, 0.6, 0.3}};
  throw InvalidParamsError("unknown scenario '" + name + "' (expected s1, s2 or s3)");
}

ReplicationResult simulate_replication(const Scenario& sc, int n, int rep, std::uint64_t seed,
                                       const McmcConfig& mcmc, double mass) {
  const PEParams truth(TimeGrid(sc.grid), sc.rates);
  Rng data_rng(seed);
  std::vector<double> times(static_cast<std::size_t>(n));
  for (double& t : times) t = truth.sample(data_rng);

  ModelSpec spec;
  spec.family = Family::simple;
  spec.grid = truth.grid();
  McmcConfig config = mcmc;
  config.seed = seed + 1;
  const auto chains = run_chains(spec, dataset_from_times(times), config);
  const auto table = summarize(chains, mass);

  ReplicationResult r;
  r.rep = rep;
  r.seed = seed;
  for (std::size_t j = 0; j < sc.rates.size(); ++j) {
    const auto& s = find_summary(table, "lambda[" + std::to_string(j + 1) + "]");
    r.rates.push_back(s);
    r.covered.push_back(s.hpd_low <= sc.rates[j] && sc.rates[j] <= s.hpd_high);
  }
  for (const auto& c : chains) r.sampling_seconds += c.meta.wall_seconds;
  return r;
}

std::vector<ReplicationResult> run_simulate(const SimulateOptions& o, std::ostream& log) {
  const auto start = Clock::now();
  if (o.n < 1) throw InvalidParamsError("--n must be >= 1");
  if (o.reps < 1) throw InvalidParamsError("--reps must be >= 1");
  const Scenario sc = scenario(o.scenario);
  o.mcmc.validate();

  Rng master(o.seed);
  std::vector<ReplicationResult> results;
  for (int rep = 0; rep < o.reps; ++rep) {
    results.push_back(simulate_replication(sc, o.n, rep + 1, master.next_u64(), o.mcmc, o.mass));
  }

  const std::size_t m = sc.rates.size();
  std::filesystem::create_directories(o.out_dir);

  std::string rows = "scenario,n,rep,seed";
  for (std::size_t j = 1; j <= m; ++j) {
    rows += fmt::format(",mean_{0},median_{0},sd_{0},hpd_low_{0},hpd_high_{0},covered_{0},ess_{0}", j);
  }
  rows += '\n';
  std::string timings = "scenario,n,rep,sampling_seconds\n";
  for (const auto& r : results) {
    rows += fmt::format("{},{},{},{}", sc.name, o.n, r.rep, r.seed);
    for (std::size_t j = 0; j < m; ++j) {
      const auto& s = r.rates[j];
      rows += fmt::format(",{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{},{:.10g}", s.mean, s.median,
                          s.sd, s.hpd_low, s.hpd_high, r.covered[j] ? 1 : 0, s.ess);
    }
    rows += '\n';
    timings += fmt::format("{},{},{},{:.6f}\n", sc.name, o.n, r.rep, r.sampling_seconds);
  }
  write_text(o.out_dir / "replications.csv", rows);
  write_text(o.out_dir / "timings.csv", timings);

  std::string agg = "parameter,true_value,mean_estimate,bias,coverage,mean_ess,min_ess,lowest_ess_share\n";
  std::vector<int> lowest(m, 0);
  for (const auto& r : results) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < m; ++j) {
      if (r.rates[j].ess < r.rates[arg].ess) arg = j;
    }
    ++lowest[arg];
  }
  const double reps = static_cast<double>(results.size());
  for (std::size_t j = 0; j < m; ++j) {
    double mean = 0.0, cover = 0.0, ess = 0.0, min_ess = INFINITY;
    for (const auto& r : results) {
      mean += r.rates[j].mean;
      cover += r.covered[j] ? 1.0 : 0.0;
      ess += r.rates[j].ess;
      min_ess = std::min(min_ess, r.rates[j].ess);
    }
    mean /= reps;
    agg += fmt::format("lambda[{}],{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g},{:.10g}\n", j + 1,
                       sc.rates[j], mean, mean - sc.rates[j], cover / reps, ess / reps, min_ess,
                       lowest[j] / reps);
  }
  write_text(o.out_dir / "aggregate.csv", agg);

  json manifest = manifest_base("simulate");
  manifest["scenario"] = sc.name;
  manifest["n"] = o.n;
  manifest["reps"] = o.reps;
  manifest["seed"] = o.seed;
  manifest["hpd_mass"] = o.mass;
  manifest["mcmc"] = json::parse(config_json(o.mcmc));
  json seeds = json::array();
  json per_rep = json::array();
  for (const auto& r : results) {
    seeds.push_back(r.seed);
    per_rep.push_back(r.sampling_seconds);
  }
  manifest["replication_seeds"] = seeds;
  manifest["outputs"] = {"replications.csv", "aggregate.csv", "timings.csv"};
  manifest["timings"] = {{"sampling_seconds", per_rep}, {"total_seconds", seconds_since(start)}};
  write_text(o.out_dir / "manifest.json", manifest.dump(2) + "\n");

  log << agg;
  return results;
}

// -- entry point --------------------------------------------------------------

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Piecewise exponential distribution and Bayesian PE survival models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PEXSURV_VERSION);

  DistArgs dist;
  auto* dist_cmd = app.add_subcommand("dist", "Evaluate or sample a PE(rates, grid) distribution");
  dist_cmd->require_subcommand(1);
  const auto add_params = [&dist](CLI::App* c) {
    c->add_option("--grid", dist.grid, "Cut points, comma separated, starting at 0")
        ->required()->delimiter(',');
    c->add_option("--rates", dist.rates, "Rates, comma separated")->required()->delimiter(',');
  };
  auto* eval_cmd = dist_cmd->add_subcommand("eval", "pdf, cdf, survival, hazard and cum-hazard at t");
  add_params(eval_cmd);
  eval_cmd->add_option("--t", dist.t, "Time point")->required();
  auto* quant_cmd = dist_cmd->add_subcommand("quantile", "Quantile at probability p");
  add_params(quant_cmd);
  quant_cmd->add_option("--p", dist.p, "Probability in (0, 1)")->required();
  auto* sample_cmd = dist_cmd->add_subcommand("sample", "Draw n variates, optionally truncated");
  add_params(sample_cmd);
  sample_cmd->add_option("--n", dist.n, "Number of draws")->required()->check(CLI::NonNegativeNumber);
  sample_cmd->add_option("--seed", dist.seed, "Generator seed (required)");
  sample_cmd->add_option("--lower", dist.lower, "Lower truncation bound");
  sample_cmd->add_option("--upper", dist.upper, "Upper truncation bound");
  sample_cmd->add_option("--out", dist.out, "Write draws to this file instead of stdout");

  FitOptions fit;
  std::string fit_model = "simple";
  std::string fit_rate_update = "conjugate";
  auto* fit_cmd = app.add_subcommand("fit", "Fit a Bayesian PE survival model by MCMC");
  fit_cmd->add_option("--model", fit_model, "simple | frailty-gamma | frailty-lognormal")
      ->check(CLI::IsMember({"simple", "frailty-gamma", "frailty-lognormal"}));
  fit_cmd->add_option("--data", fit.data, "CSV path, or 'kidney' for the bundled data");
  fit_cmd->add_option("--m", fit.m, "Number of intervals for --grid equal")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--grid", fit.grid, "'equal' or explicit comma separated cut points");
  fit_cmd->add_option("--mass", fit.mass, "HPD mass")->check(CLI::Range(0.0, 1.0));
  fit_cmd->add_option("--out", fit.out_dir, "Output directory");
  fit_cmd->add_flag("--no-augment", [&fit](std::int64_t) { fit.mcmc.augment_censored = false; },
                    "Use log S(censor_time) instead of imputing censored times");
  fit_cmd->add_flag("--monitor-frailties", fit.mcmc.monitor_frailties, "Record z_i draws");
  fit_cmd->add_option("--monitor-times", fit.mcmc.monitor_times, "Record baseline h, H, S at these times")
      ->delimiter(',');
  fit_cmd->add_option("--monitor-probs", fit.mcmc.monitor_probs, "Record baseline quantiles")
      ->delimiter(',');
  add_mcmc_options(fit_cmd, fit.mcmc, fit_rate_update);

  SimulateOptions sim;
  std::string sim_rate_update = "slice";
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study of the simple PE model");
  sim_cmd->add_option("--scenario", sim.scenario, "s1 | s2 | s3")
      ->check(CLI::IsMember({"s1", "s2", "s3"}));
  sim_cmd->add_option("--n", sim.n, "Sample size per replication")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--reps", sim.reps, "Replications")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--mass", sim.mass, "HPD mass")->check(CLI::Range(0.0, 1.0));
  sim_cmd->add_option("--out", sim.out_dir, "Output directory");
  add_mcmc_options(sim_cmd, sim.mcmc, sim_rate_update);
  // --seed on simulate seeds the replication stream rather than the chains.
  sim_cmd->get_option("--seed")->description("Master seed for the replications");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    if (dist_cmd->parsed()) {
      if (eval_cmd->parsed()) return dist_eval(dist, out, err);
      if (quant_cmd->parsed()) return dist_quantile(dist, out, err);
      return dist_sample(dist, out, err);
    }
    if (fit_cmd->parsed()) {
      fit.family = parse_family(fit_model);
      fit.mcmc.rate_update = parse_rate_update(fit_rate_update);
      run_fit(fit, out);
      return kOk;
    }
    sim.seed = sim.mcmc.seed;
    sim.mcmc.rate_update = parse_rate_update(sim_rate_update);
    run_simulate(sim, out);
    return kOk;
  } catch (const ChainError& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const InvalidParamsError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace pexsurv::app
