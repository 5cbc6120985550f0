#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bookend/mcmc.hpp"
#include "bookend/meta_core.hpp"
#include "bookend/models.hpp"
#include "bookend/parallel.hpp"
#include "bookend/summary.hpp"

namespace bookend {

struct StudyBaseline {
  std::string study_id;
  double mu_hat = 0.0;
  /// Control-arm empirical logit, reported alongside mu_hat.
  double empirical_logit = 0.0;
  std::int64_t total_size = 0;

  bool operator==(const StudyBaseline&) const = default;
};

struct SpreadAssessment {
  std::vector<StudyBaseline> baselines;
  double spread = 0.0;
  double threshold = 1.0;
  bool flag = false;
};

struct BookendPair {
  std::string low;
  std::string high;
};

struct MixingSummary {
  std::string study_id;
  ParameterSummary posterior;
  bool boundary_warning = false;

  bool operator==(const MixingSummary&) const = default;
};

struct WorkflowOptions {
  double spread_threshold = 1.0;
  /// Discrepancy is flagged above this multiple of the FE posterior sd of d.
  double discrepancy_sd_multiple = 0.5;
  double w_boundary = 0.05;
  /// Overrides automatic bookend selection when both are set.
  std::optional<BookendPair> bookends;
};

struct DiagnosticsReport {
  std::vector<StudyBaseline> baselines;
  double spread = 0.0;
  double spread_threshold = 1.0;
  bool flag_spread = false;
  std::string bookend_low;
  std::string bookend_high;
  ParameterSummary d_standard;
  ParameterSummary d_bookend;
  double discrepancy = 0.0;
  double discrepancy_threshold = 0.0;
  bool flag_discrepancy = false;
  std::vector<MixingSummary> w_summaries;
  std::vector<std::string> warnings;

  bool operator==(const DiagnosticsReport&) const = default;
};

/// Baseline posterior means of a standard FE fit, in dataset order.
std::vector<StudyBaseline> study_baselines(const Dataset& data, const FitResult& fe);

SpreadAssessment assess_baseline_spread(const Dataset& data, const FitResult& fe, double threshold = 1.0);

/// Lowest and highest mu_hat. Ties go to the larger study, then to the
/// lexicographically smaller id; the high bookend is chosen among the
/// studies left after the low one. Throws std::invalid_argument for fewer
/// than three studies.
BookendPair identify_bookends(const std::vector<StudyBaseline>& baselines);
BookendPair identify_bookends(const Dataset& data, const FitResult& fe);

/// Fits the standard FE model, picks bookends from it, fits the bookend
/// model and compares the two estimates of d. The fitted results are
/// returned through the optional out-parameters.
DiagnosticsReport sensitivity_compare(const Dataset& data, const SamplerConfig& cfg,
                                      const WorkflowOptions& options = {},
                                      Execution exec = Execution::Parallel, FitResult* fe_out = nullptr,
                                      FitResult* bookend_out = nullptr);

void to_json(nlohmann::json& j, const ParameterSummary& s);
void from_json(const nlohmann::json& j, ParameterSummary& s);
void to_json(nlohmann::json& j, const DiagnosticsReport& r);
void from_json(const nlohmann::json& j, DiagnosticsReport& r);

}  // namespace bookend
