#include "pexsurv/chain_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pexsurv/errors.hpp"

namespace pexsurv {
namespace {

nlohmann::ordered_json config_to_json(const McmcConfig& c) {
  nlohmann::ordered_json j;
  j["n_chains"] = c.n_chains;
  j["burn_in"] = c.burn_in;
  j["n_iter"] = c.n_iter;
  j["thin"] = c.thin;
  j["seed"] = c.seed;
  j["slice_width"] = c.slice.width;
  j["slice_max_steps"] = c.slice.max_steps;
  j["rate_update"] = c.rate_update == RateUpdate::conjugate ? "conjugate" : "slice";
  j["augment_censored"] = c.augment_censored;
  j["monitor_frailties"] = c.monitor_frailties;
  j["monitor_times"] = c.monitor_times;
  j["monitor_probs"] = c.monitor_probs;
  return j;
}

}  // namespace

void write_chain_csv(std::ostream& out, const ChainStore& chain) {
  for (std::size_t k = 0; k < chain.names.size(); ++k) {
    if (k) out << ',';
    out << chain.names[k];
  }
  out << '\n';
  char buf[32];
  for (std::size_t row = 0; row < chain.num_draws(); ++row) {
    for (std::size_t k = 0; k < chain.draws.size(); ++k) {
      if (k) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", chain.draws[k][row]);
      out << buf;
    }
    out << '\n';
  }
}

ChainStore read_chain_csv(std::istream& in) {
  ChainStore chain;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty chain file");
  {
    std::istringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) chain.names.push_back(name);
  }
  chain.draws.assign(chain.names.size(), {});
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(row, cell, ',')) {
      if (k >= chain.names.size()) throw ParseError(lineno, "too many columns");
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw ParseError(lineno, "not a number: '" + cell + "'");
      chain.draws[k++].push_back(v);
    }
    if (k != chain.names.size()) throw ParseError(lineno, "too few columns");
  }
  return chain;
}

std::string config_json(const McmcConfig& config) { return config_to_json(config).dump(2); }

std::string chain_metadata_json(const ChainStore& chain) {
  nlohmann::ordered_json j;
  j["chain_id"] = chain.meta.chain_id;
  j["seed"] = chain.meta.seed;
  j["family"] = std::string(to_string(chain.meta.family));
  j["retained_draws"] = chain.num_draws();
  j["columns"] = chain.names;
  j["config"] = config_to_json(chain.meta.config);
  j["timings"] = {{"sampling_seconds", chain.meta.wall_seconds}};
  return j.dump(2) + "\n";
}

}  // namespace pexsurv
