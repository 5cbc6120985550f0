#include "bookend/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace bookend {

IngestError::IngestError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::int64_t parse_count(const std::string& field, const char* what, std::size_t line) {
  std::int64_t value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end)
    throw IngestError(line, std::string("malformed ") + what + " '" + field + "'");
  return value;
}

}  // namespace

Dataset parse_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;

  struct Seen {
    std::size_t first_line = 0;
    bool control = false;
    bool active = false;
  };
  std::map<std::string, Seen> seen;
  std::vector<ArmData> arms;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (!have_header) {
      if (fields != std::vector<std::string>{"study", "treatment", "events", "n"})
        throw IngestError(line_no, "expected header 'study,treatment,events,n'");
      have_header = true;
      continue;
    }
    if (fields.size() != 4)
      throw IngestError(line_no, "expected 4 fields, found " + std::to_string(fields.size()));

    ArmData arm;
    arm.study_id = fields[0];
    if (arm.study_id.empty()) throw IngestError(line_no, "empty study id");
    const std::int64_t treatment = parse_count(fields[1], "treatment", line_no);
    if (treatment != 1 && treatment != 2) throw IngestError(line_no, "treatment must be 1 or 2");
    arm.treatment = treatment == 1 ? Treatment::Control : Treatment::Active;
    arm.events = parse_count(fields[2], "events", line_no);
    arm.size = parse_count(fields[3], "n", line_no);
    if (arm.events < 0 || arm.size < 0) throw IngestError(line_no, "negative count");
    if (arm.size < 1) throw IngestError(line_no, "n must be at least 1");
    if (arm.events > arm.size)
      throw IngestError(line_no, "events (" + std::to_string(arm.events) + ") exceed n (" +
                                     std::to_string(arm.size) + ")");

    auto& s = seen[arm.study_id];
    if (s.first_line == 0) s.first_line = line_no;
    bool& slot = arm.treatment == Treatment::Control ? s.control : s.active;
    if (slot)
      throw IngestError(line_no, "duplicate treatment " + std::to_string(treatment) + " for study " + arm.study_id);
    slot = true;
    arms.push_back(std::move(arm));
  }

  if (arms.empty()) throw IngestError(0, "no studies");
  for (const auto& [id, s] : seen) {
    if (!s.control) throw IngestError(s.first_line, "study " + id + " has no control arm (treatment 1)");
    if (!s.active) throw IngestError(s.first_line, "study " + id + " has no active arm (treatment 2)");
  }
  return Dataset(std::move(arms));
}

Dataset ingest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(0, "cannot open " + path.string());
  return parse_dataset(in);
}

void emit(const Dataset& data, std::ostream& out) {
  out << "study,treatment,events,n\n";
  for (const auto& a : data.arms())
    out << a.study_id << ',' << static_cast<int>(a.treatment) << ',' << a.events << ',' << a.size << '\n';
}

nlohmann::json dataset_json(const Dataset& data) {
  nlohmann::json studies = nlohmann::json::array();
  for (const auto& e : observed_effects(data)) {
    const auto& s = data.studies()[data.study_index(e.study_id)];
    studies.push_back({{"study", s.id},
                       {"control", {{"events", s.control.events}, {"n", s.control.size}}},
                       {"active", {{"events", s.active.events}, {"n", s.active.size}}},
                       {"observed_log_or", e.estimate.log_or},
                       {"observed_se", e.estimate.se},
                       {"continuity_corrected", e.corrected},
                       {"degenerate", e.degenerate}});
  }
  return studies;
}

nlohmann::json sampler_json(const SamplerConfig& cfg) {
  return {{"chains", cfg.n_chains},
          {"burn_in", cfg.burn_in},
          {"retained_total", cfg.retained_total},
          {"retained_per_chain", cfg.retained_per_chain()},
          {"thin", cfg.thin},
          {"seed", cfg.seed},
          {"adapt_window", cfg.adapt_window},
          {"target_accept", cfg.target_accept}};
}

nlohmann::json spec_json(const ModelSpec& spec) {
  nlohmann::json j = {{"kind", to_string(spec.kind)}, {"prior_sd_logodds", spec.prior_sd_logodds}};
  if (spec.kind == ModelKind::Bookend) {
    j["bookend_low"] = spec.bookend_low;
    j["bookend_high"] = spec.bookend_high;
  }
  if (spec.kind == ModelKind::StandardRE) {
    j["tau_prior_scale"] = spec.tau_prior_scale;
    if (spec.fixed_tau) j["fixed_tau"] = *spec.fixed_tau;
  }
  return j;
}

nlohmann::json fit_json(const FitResult& fit) {
  nlohmann::json params = nlohmann::json::array();
  for (std::size_t i = 0; i < fit.parameters.size(); ++i) {
    const auto& info = fit.parameters[i];
    nlohmann::json p = fit.summary.at(info.name);
    p["role"] = to_string(info.role);
    if (!info.study_id.empty()) p["study"] = info.study_id;
    if (info.derived)
      p["derived"] = true;
    else
      p["accept_rate"] = fit.chains.accept_rates.at(i);
    params.push_back(std::move(p));
  }
  const auto max_rhat = fit.summary.max_rhat();
  return {{"model", spec_json(fit.model)},
          {"sampler", sampler_json(fit.chains.config)},
          {"total_draws", fit.summary.total_draws},
          {"parameters", params},
          {"converged", fit.converged},
          {"max_rhat", max_rhat ? nlohmann::json(*max_rhat) : nlohmann::json(nullptr)},
          {"warnings", fit.warnings}};
}

nlohmann::json attenuation_json(const ScenarioParams& params, const AttenuationReport& r) {
  return {{"mu1", params.mu1},
          {"mu2", params.mu2},
          {"d", params.d},
          {"w", params.w},
          {"p11", r.p11},
          {"p12", r.p12},
          {"p21", r.p21},
          {"p22", r.p22},
          {"p_mix_control", r.p_mix_control},
          {"p_mix_active", r.p_mix_active},
          {"or_mix", r.or_mix},
          {"log_or_mix", r.log_or_mix},
          {"attenuation_factor",
           r.attenuation_factor ? nlohmann::json(*r.attenuation_factor) : nlohmann::json("undefined")}};
}

nlohmann::json sweep_row_json(const SweepRow& row) {
  return {{"gap", row.cell.gap},
          {"w", row.cell.w},
          {"d", row.cell.d},
          {"replications", row.replications},
          {"fe_mean", row.fe_mean},
          {"fe_se", row.fe_se},
          {"bookend_mean", row.bookend_mean},
          {"bookend_se", row.bookend_se},
          {"exact_log_or_mix", row.exact_log_or_mix},
          {"attenuation_factor",
           row.attenuation_factor ? nlohmann::json(*row.attenuation_factor) : nlohmann::json("undefined")},
          {"fe_limit", row.fe_limit}};
}

namespace {

std::string fmt_optional(const std::optional<double>& v) {
  if (!v) return "undefined";
  std::ostringstream s;
  s << std::setprecision(6) << *v;
  return s.str();
}

}  // namespace

std::string text_summary(const Dataset& data, const FitResult& fit) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "model: " << to_string(fit.model.kind);
  if (fit.model.kind == ModelKind::Bookend)
    out << " (low = " << fit.model.bookend_low << ", high = " << fit.model.bookend_high << ")";
  out << "\nseed: " << fit.chains.config.seed << "  chains: " << fit.chains.config.n_chains
      << "  draws: " << fit.summary.total_draws << "\n\n";

  out << "observed studies\n";
  for (const auto& e : observed_effects(data)) {
    const auto ci = e.estimate.ci95();
    out << "  " << std::left << std::setw(10) << e.study_id << std::right << " logOR " << std::setw(10)
        << e.estimate.log_or << "  SE " << std::setw(10) << e.estimate.se << "  95% CI (" << ci.lower << ", "
        << ci.upper << ")" << (e.corrected ? "  [0.5 added]" : "") << (e.degenerate ? "  [degenerate]" : "")
        << '\n';
  }

  out << "\nposterior\n";
  out << "  " << std::left << std::setw(14) << "parameter" << std::right << std::setw(12) << "mean"
      << std::setw(12) << "sd" << std::setw(12) << "2.5%" << std::setw(12) << "50%" << std::setw(12) << "97.5%"
      << std::setw(12) << "R-hat" << std::setw(12) << "ESS" << '\n';
  for (const auto& p : fit.summary.parameters) {
    out << "  " << std::left << std::setw(14) << p.name << std::right << std::setw(12) << p.mean << std::setw(12)
        << p.sd << std::setw(12) << p.q025 << std::setw(12) << p.q50 << std::setw(12) << p.q975 << std::setw(12)
        << fmt_optional(p.rhat) << std::setw(12) << fmt_optional(p.ess) << '\n';
  }
  out << "\nconverged: " << (fit.converged ? "yes" : "no") << '\n';
  for (const auto& w : fit.warnings) out << "warning: " << w << '\n';
  return out.str();
}

std::string text_summary(const DiagnosticsReport& r) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "baseline log-odds (standard FE posterior means)\n";
  for (const auto& b : r.baselines)
    out << "  " << std::left << std::setw(10) << b.study_id << std::right << " mu_hat " << std::setw(10) << b.mu_hat
        << "  empirical " << std::setw(10) << b.empirical_logit << '\n';
  out << "spread: " << r.spread << " (threshold " << r.spread_threshold << ") -> "
      << (r.flag_spread ? "heterogeneous baselines, non-collapsibility bias possible" : "baselines similar")
      << '\n';
  out << "bookends: low = " << r.bookend_low << ", high = " << r.bookend_high << "\n\n";
  out << "d standard FE: " << r.d_standard.mean << "  95% CrI (" << r.d_standard.q025 << ", " << r.d_standard.q975
      << ")\n";
  out << "d bookend:     " << r.d_bookend.mean << "  95% CrI (" << r.d_bookend.q025 << ", " << r.d_bookend.q975
      << ")\n";
  out << "discrepancy: " << r.discrepancy << " (threshold " << r.discrepancy_threshold << ") -> "
      << (r.flag_discrepancy ? "models disagree, investigate" : "models agree") << '\n';
  for (const auto& m : r.w_summaries)
    out << "w[" << m.study_id << "]: " << m.posterior.mean << "  95% CrI (" << m.posterior.q025 << ", "
        << m.posterior.q975 << ")" << (m.boundary_warning ? "  [boundary]" : "") << '\n';
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
  return out.str();
}

std::string text_summary(const ScenarioParams& params, const AttenuationReport& r) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "mu1 " << params.mu1 << "  mu2 " << params.mu2 << "  d " << params.d << "  w " << params.w << '\n';
  out << "p11 " << r.p11 << "  p12 " << r.p12 << "  p21 " << r.p21 << "  p22 " << r.p22 << '\n';
  out << "p_mix control " << r.p_mix_control << "  p_mix active " << r.p_mix_active << '\n';
  out << "OR_mix " << r.or_mix << "  log OR_mix " << r.log_or_mix << '\n';
  out << "attenuation factor " << fmt_optional(r.attenuation_factor) << '\n';
  return out.str();
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "gap,w,d,replications,fe_mean,fe_se,bookend_mean,bookend_se,exact_log_or_mix,attenuation_factor,fe_limit\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : rows) {
    out << r.cell.gap << ',' << r.cell.w << ',' << r.cell.d << ',' << r.replications << ',' << r.fe_mean << ','
        << r.fe_se << ',' << r.bookend_mean << ',' << r.bookend_se << ',' << r.exact_log_or_mix << ',';
    if (r.attenuation_factor)
      out << *r.attenuation_factor;
    else
      out << "undefined";
    out << ',' << r.fe_limit << '\n';
  }
}

}  // namespace bookend
