#include "bookend/workflow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bookend {

std::vector<StudyBaseline> study_baselines(const Dataset& data, const FitResult& fe) {
  if (fe.model.kind != ModelKind::StandardFE) throw std::invalid_argument("baselines need a standard FE fit");
  std::vector<StudyBaseline> out;
  for (const auto& s : data.studies()) {
    StudyBaseline b;
    b.study_id = s.id;
    b.mu_hat = fe.summary.at(fe.study_parameter(s.id)).mean;
    b.empirical_logit = empirical_logit(s.control);
    b.total_size = s.total_size();
    out.push_back(std::move(b));
  }
  return out;
}

SpreadAssessment assess_baseline_spread(const Dataset& data, const FitResult& fe, double threshold) {
  SpreadAssessment out;
  out.baselines = study_baselines(data, fe);
  if (out.baselines.size() < 2) throw std::invalid_argument("spread needs at least two studies");
  const auto [lo, hi] = std::minmax_element(out.baselines.begin(), out.baselines.end(),
                                            [](const auto& a, const auto& b) { return a.mu_hat < b.mu_hat; });
  out.spread = hi->mu_hat - lo->mu_hat;
  out.threshold = threshold;
  out.flag = out.spread > threshold;
  return out;
}

namespace {

// True when `a` is the preferred bookend over `b` among equal mu_hat.
bool preferred(const StudyBaseline& a, const StudyBaseline& b) {
  if (a.total_size != b.total_size) return a.total_size > b.total_size;
  return a.study_id < b.study_id;
}

}  // namespace

BookendPair identify_bookends(const std::vector<StudyBaseline>& baselines) {
  if (baselines.size() < 3) throw std::invalid_argument("bookend selection needs at least three studies");

  const StudyBaseline* low = &baselines.front();
  for (const auto& b : baselines)
    if (b.mu_hat < low->mu_hat || (b.mu_hat == low->mu_hat && preferred(b, *low))) low = &b;

  const StudyBaseline* high = nullptr;
  for (const auto& b : baselines) {
    if (&b == low) continue;
    if (!high || b.mu_hat > high->mu_hat || (b.mu_hat == high->mu_hat && preferred(b, *high))) high = &b;
  }
  return {low->study_id, high->study_id};
}

BookendPair identify_bookends(const Dataset& data, const FitResult& fe) {
  return identify_bookends(study_baselines(data, fe));
}

DiagnosticsReport sensitivity_compare(const Dataset& data, const SamplerConfig& cfg, const WorkflowOptions& options,
                                      Execution exec, FitResult* fe_out, FitResult* bookend_out) {
  if (data.study_count() < 3) throw std::invalid_argument("sensitivity analysis needs at least three studies");

  ModelSpec fe_spec;
  fe_spec.kind = ModelKind::StandardFE;
  FitResult fe = fit(data, fe_spec, cfg, exec);

  DiagnosticsReport report;
  const SpreadAssessment spread = assess_baseline_spread(data, fe, options.spread_threshold);
  report.baselines = spread.baselines;
  report.spread = spread.spread;
  report.spread_threshold = spread.threshold;
  report.flag_spread = spread.flag;

  const BookendPair pair = options.bookends ? *options.bookends : identify_bookends(report.baselines);
  report.bookend_low = pair.low;
  report.bookend_high = pair.high;

  ModelSpec bk_spec;
  bk_spec.kind = ModelKind::Bookend;
  bk_spec.bookend_low = pair.low;
  bk_spec.bookend_high = pair.high;
  FitResult bk = fit(data, bk_spec, cfg, exec);

  report.d_standard = fe.effect();
  report.d_bookend = bk.effect();
  report.discrepancy = std::abs(report.d_standard.mean - report.d_bookend.mean);
  report.discrepancy_threshold = options.discrepancy_sd_multiple * report.d_standard.sd;
  report.flag_discrepancy = report.discrepancy > report.discrepancy_threshold;

  for (const auto& p : bk.parameters) {
    if (p.role != ParameterRole::Mixing) continue;
    MixingSummary m;
    m.study_id = p.study_id;
    m.posterior = bk.summary.at(p.name);
    m.boundary_warning = m.posterior.mean < options.w_boundary || m.posterior.mean > 1.0 - options.w_boundary;
    if (m.boundary_warning) {
      std::ostringstream msg;
      msg << "mixing share of study " << p.study_id << " is near a boundary (posterior mean " << m.posterior.mean
          << "); its baseline may lie outside the bookend range";
      report.warnings.push_back(msg.str());
    }
    report.w_summaries.push_back(std::move(m));
  }
  for (const auto& w : fe.warnings) report.warnings.push_back("standard-fe: " + w);
  for (const auto& w : bk.warnings) report.warnings.push_back("bookend: " + w);

  if (fe_out) *fe_out = std::move(fe);
  if (bookend_out) *bookend_out = std::move(bk);
  return report;
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const ParameterSummary& s) {
  j = {{"name", s.name},   {"mean", s.mean}, {"sd", s.sd},
       {"q2.5", s.q025},   {"q50", s.q50},   {"q97.5", s.q975},
       {"rhat", optional_number(s.rhat)}, {"ess", optional_number(s.ess)}};
}

void from_json(const nlohmann::json& j, ParameterSummary& s) {
  s.name = j.at("name").get<std::string>();
  s.mean = j.at("mean").get<double>();
  s.sd = j.at("sd").get<double>();
  s.q025 = j.at("q2.5").get<double>();
  s.q50 = j.at("q50").get<double>();
  s.q975 = j.at("q97.5").get<double>();
  s.rhat = read_optional(j.at("rhat"));
  s.ess = read_optional(j.at("ess"));
}

void to_json(nlohmann::json& j, const DiagnosticsReport& r) {
  nlohmann::json baselines = nlohmann::json::array();
  for (const auto& b : r.baselines)
    baselines.push_back({{"study", b.study_id},
                         {"mu_hat", b.mu_hat},
                         {"empirical_logit", b.empirical_logit},
                         {"total_size", b.total_size}});
  nlohmann::json mixing = nlohmann::json::array();
  for (const auto& m : r.w_summaries)
    mixing.push_back({{"study", m.study_id}, {"posterior", m.posterior}, {"boundary_warning", m.boundary_warning}});

  j = {{"baselines", baselines},
       {"spread", r.spread},
       {"spread_threshold", r.spread_threshold},
       {"flag_spread", r.flag_spread},
       {"bookend_low", r.bookend_low},
       {"bookend_high", r.bookend_high},
       {"d_standard", r.d_standard},
       {"d_bookend", r.d_bookend},
       {"discrepancy", r.discrepancy},
       {"discrepancy_threshold", r.discrepancy_threshold},
       {"flag_discrepancy", r.flag_discrepancy},
       {"w_summaries", mixing},
       {"warnings", r.warnings}};
}

void from_json(const nlohmann::json& j, DiagnosticsReport& r) {
  r.baselines.clear();
  for (const auto& b : j.at("baselines"))
    r.baselines.push_back({b.at("study").get<std::string>(), b.at("mu_hat").get<double>(),
                           b.at("empirical_logit").get<double>(), b.at("total_size").get<std::int64_t>()});
  r.spread = j.at("spread").get<double>();
  r.spread_threshold = j.at("spread_threshold").get<double>();
  r.flag_spread = j.at("flag_spread").get<bool>();
  r.bookend_low = j.at("bookend_low").get<std::string>();
  r.bookend_high = j.at("bookend_high").get<std::string>();
  r.d_standard = j.at("d_standard").get<ParameterSummary>();
  r.d_bookend = j.at("d_bookend").get<ParameterSummary>();
  r.discrepancy = j.at("discrepancy").get<double>();
  r.discrepancy_threshold = j.at("discrepancy_threshold").get<double>();
  r.flag_discrepancy = j.at("flag_discrepancy").get<bool>();
  r.w_summaries.clear();
  for (const auto& m : j.at("w_summaries"))
    r.w_summaries.push_back({m.at("study").get<std::string>(), m.at("posterior").get<ParameterSummary>(),
                             m.at("boundary_warning").get<bool>()});
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
}

}  // namespace bookend
