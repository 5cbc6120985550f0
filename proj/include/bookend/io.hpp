#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bookend/meta_core.hpp"
#include "bookend/models.hpp"
#include "bookend/simulate.hpp"
#include "bookend/workflow.hpp"

namespace bookend {

/// Input problem tied to a line of the data file (0 when not line-specific).
class IngestError : public std::runtime_error {
 public:
  IngestError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Long-format arm table with header `study,treatment,events,n`, one row
/// per arm, treatment 1 (control) or 2 (active).
Dataset parse_dataset(std::istream& in);
Dataset ingest(const std::filesystem::path& path);
void emit(const Dataset& data, std::ostream& out);

nlohmann::json dataset_json(const Dataset& data);
nlohmann::json sampler_json(const SamplerConfig& cfg);
nlohmann::json spec_json(const ModelSpec& spec);
nlohmann::json fit_json(const FitResult& fit);
nlohmann::json attenuation_json(const ScenarioParams& params, const AttenuationReport& report);
nlohmann::json sweep_row_json(const SweepRow& row);

/// Human-readable summaries; numbers carry 6 significant digits.
std::string text_summary(const Dataset& data, const FitResult& fit);
std::string text_summary(const DiagnosticsReport& report);
std::string text_summary(const ScenarioParams& params, const AttenuationReport& report);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace bookend
