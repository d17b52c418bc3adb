#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pexsurv {

struct SurvivalRecord {
  int subject_id = 0;    // 1-based, contiguous across the dataset
  int replicate_id = 1;  // insertion number within a subject
  std::optional<double> time;  // present iff event
  double censor_time = 0.0;    // > 0 for censored records, 0 otherwise
  bool event = false;
  std::vector<double> covariates;

  /// Event time or censoring time.
  double observed_time() const { return event ? *time : censor_time; }

  bool operator==(const SurvivalRecord&) const = default;
};

struct SurvivalDataset {
  std::vector<SurvivalRecord> records;
  std::vector<std::string> covariate_names;

  std::size_t size() const { return records.size(); }
  std::size_t num_covariates() const { return covariate_names.size(); }
  std::size_t num_subjects() const;
  std::size_t num_events() const;
  double max_event_time() const;
  double max_observed_time() const;

  /// Throws SchemaError on an arity mismatch, non-contiguous subject ids or a
  /// record that breaks the event/censoring invariant.
  void validate() const;

  bool operator==(const SurvivalDataset&) const = default;
};

/// Parses `subject,replicate,time,status[,covariate...]` with a header row.
/// For status 0 the time column holds the censoring time. Malformed rows raise
/// ParseError with the 1-based line number.
SurvivalDataset read_dataset_csv(std::istream& in);
SurvivalDataset read_dataset_csv(std::string_view text);
SurvivalDataset read_dataset_file(const std::string& path);

void write_dataset_csv(std::ostream& out, const SurvivalDataset& data);

/// Bundled kidney catheter data: 38 subjects, two insertions each, covariates
/// sex (1 = female) and age in years.
std::string_view kidney_csv();
SurvivalDataset kidney_dataset();

/// Uncensored dataset with one record per time and no covariates.
SurvivalDataset dataset_from_times(const std::vector<double>& times);

}  // namespace pexsurv
