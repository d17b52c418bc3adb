#include "pexsurv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "pexsurv/errors.hpp"

namespace pexsurv {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int parse_int(std::string_view s, std::size_t line, const char* column) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line, std::string("column '") + column + "' is not an integer: '" +
                               std::string(s) + "'");
  }
  return value;
}

double parse_double(std::string_view s, std::size_t line, const std::string& column) {
  // std::from_chars for double is missing from older libstdc++.
  const std::string buf(s);
  char* end = nullptr;
  const double value = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(value)) {
    throw ParseError(line, "column '" + column + "' is not a finite number: '" + buf + "'");
  }
  return value;
}

}  // namespace

std::size_t SurvivalDataset::num_subjects() const {
  int max_id = 0;
  for (const auto& r : records) max_id = std::max(max_id, r.subject_id);
  return static_cast<std::size_t>(max_id);
}

std::size_t SurvivalDataset::num_events() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.event; }));
}

double SurvivalDataset::max_event_time() const {
  double m = 0.0;
  for (const auto& r : records) {
    if (r.event) m = std::max(m, *r.time);
  }
  return m;
}

double SurvivalDataset::max_observed_time() const {
  double m = 0.0;
  for (const auto& r : records) m = std::max(m, r.observed_time());
  return m;
}

void SurvivalDataset::validate() const {
  if (records.empty()) throw SchemaError("dataset has no records");
  std::set<int> ids;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string where = "record " + std::to_string(i + 1) + ": ";
    if (r.covariates.size() != covariate_names.size()) {
      throw SchemaError(where + "covariate count does not match header");
    }
    if (r.event) {
      if (!r.time || !(*r.time > 0.0)) throw SchemaError(where + "event requires a time > 0");
    } else {
      if (r.time) throw SchemaError(where + "censored record must not carry an event time");
      if (!(r.censor_time > 0.0)) throw SchemaError(where + "censored record requires censor_time > 0");
    }
    if (r.subject_id < 1) throw SchemaError(where + "subject ids start at 1");
    ids.insert(r.subject_id);
  }
  if (static_cast<std::size_t>(*ids.rbegin()) != ids.size()) {
    throw SchemaError("subject ids must form the contiguous range 1..S");
  }
}

SurvivalDataset read_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  SurvivalDataset data;

  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw ParseError(lineno, "missing header row");
  const auto header = split(line);
  static constexpr const char* kRequired[] = {"subject", "replicate", "time", "status"};
  if (header.size() < 4) throw ParseError(lineno, "header needs subject,replicate,time,status");
  for (std::size_t c = 0; c < 4; ++c) {
    if (header[c] != kRequired[c]) {
      throw ParseError(lineno, std::string("expected column '") + kRequired[c] + "', got '" +
                                   std::string(header[c]) + "'");
    }
  }
  for (std::size_t c = 4; c < header.size(); ++c) data.covariate_names.emplace_back(header[c]);

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError(lineno, "expected " + std::to_string(header.size()) + " columns, got " +
                                   std::to_string(cells.size()));
    }
    SurvivalRecord r;
    r.subject_id = parse_int(cells[0], lineno, "subject");
    r.replicate_id = parse_int(cells[1], lineno, "replicate");
    const int status = parse_int(cells[3], lineno, "status");
    if (status != 0 && status != 1) throw ParseError(lineno, "status must be 0 or 1");
    if (cells[2].empty()) {
      throw ParseError(lineno, status == 1 ? "event row has no time" : "censored row has no censoring time");
    }
    const double t = parse_double(cells[2], lineno, "time");
    if (!(t > 0.0)) throw ParseError(lineno, "time must be > 0");
    r.event = status == 1;
    if (r.event) {
      r.time = t;
    } else {
      r.censor_time = t;
    }
    for (std::size_t c = 4; c < cells.size(); ++c) {
      r.covariates.push_back(parse_double(cells[c], lineno, data.covariate_names[c - 4]));
    }
    data.records.push_back(std::move(r));
  }
  data.validate();
  return data;
}

SurvivalDataset read_dataset_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_dataset_csv(in);
}

SurvivalDataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file '" + path + "'");
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const SurvivalDataset& data) {
  out << "subject,replicate,time,status";
  for (const auto& name : data.covariate_names) out << ',' << name;
  out << '\n';
  char buf[32];
  auto num = [&buf](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  };
  for (const auto& r : data.records) {
    out << r.subject_id << ',' << r.replicate_id << ',' << num(r.observed_time()) << ','
        << (r.event ? 1 : 0);
    for (double x : r.covariates) out << ',' << num(x);
    out << '\n';
  }
}

SurvivalDataset kidney_dataset() { return read_dataset_csv(kidney_csv()); }

SurvivalDataset dataset_from_times(const std::vector<double>& times) {
  SurvivalDataset data;
  data.records.reserve(times.size());
  int id = 0;
  for (double t : times) {
    SurvivalRecord r;
    r.subject_id = ++id;
    r.time = t;
    r.event = true;
    data.records.push_back(std::move(r));
  }
  return data;
}

}  // namespace pexsurv
