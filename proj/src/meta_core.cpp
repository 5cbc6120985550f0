#include "bookend/meta_core.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace bookend {

Dataset::Dataset(std::vector<ArmData> arms, EmptyArms empty) : arms_(std::move(arms)) {
  struct Slots {
    std::optional<ArmData> control;
    std::optional<ArmData> active;
  };
  std::map<std::string, Slots> by_id;
  std::vector<std::string> order;

  for (const auto& arm : arms_) {
    if (arm.study_id.empty()) throw std::invalid_argument("arm with empty study id");
    const std::int64_t min_size = empty == EmptyArms::Allow ? 0 : 1;
    if (arm.size < min_size)
      throw std::invalid_argument("study " + arm.study_id + ": arm size must be at least " +
                                  std::to_string(min_size));
    if (arm.events < 0 || arm.events > arm.size)
      throw std::invalid_argument("study " + arm.study_id + ": events must lie in [0, n]");

    auto [it, inserted] = by_id.try_emplace(arm.study_id);
    if (inserted) order.push_back(arm.study_id);
    auto& slot = arm.treatment == Treatment::Control ? it->second.control : it->second.active;
    if (slot)
      throw std::invalid_argument("study " + arm.study_id + ": duplicate treatment " +
                                  std::to_string(static_cast<int>(arm.treatment)));
    slot = arm;
  }

  for (const auto& id : order) {
    const auto& slots = by_id.at(id);
    if (!slots.control) throw std::invalid_argument("study " + id + ": missing control arm");
    if (!slots.active) throw std::invalid_argument("study " + id + ": missing active arm");
    studies_.push_back({id, *slots.control, *slots.active});
  }
}

std::size_t Dataset::study_index(const std::string& id) const {
  for (std::size_t j = 0; j < studies_.size(); ++j)
    if (studies_[j].id == id) return j;
  throw std::out_of_range("unknown study id: " + id);
}

bool Dataset::has_study(const std::string& id) const {
  for (const auto& s : studies_)
    if (s.id == id) return true;
  return false;
}

void ScenarioParams::validate() const {
  if (!std::isfinite(mu1) || !std::isfinite(mu2) || !std::isfinite(d))
    throw std::invalid_argument("scenario log-odds values must be finite");
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("mixing proportion w must lie in [0, 1]");
  if (arm_size < 1) throw std::invalid_argument("arm size must be at least 1");
}

double inverse_logit(double x) {
  if (!std::isfinite(x)) throw std::domain_error("inverse_logit: non-finite input");
  if (x < 0.0) {
    const double e = std::exp(x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(-x));
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("logit: argument outside (0, 1)");
  return std::log(p) - std::log1p(-p);
}

double log_inverse_logit(double x) {
  if (x < 0.0) return x - std::log1p(std::exp(x));
  return -std::log1p(std::exp(-x));
}

double log_odds_ratio(double p_control, double p_active) {
  return logit(p_active) - logit(p_control);
}

AttenuationReport exact_mixture_or(const ScenarioParams& params) {
  if (!(params.w >= 0.0 && params.w <= 1.0))
    throw std::invalid_argument("mixing proportion w must lie in [0, 1]");
  AttenuationReport out;
  out.p11 = inverse_logit(params.mu1);
  out.p12 = inverse_logit(params.mu1 + params.d);
  out.p21 = inverse_logit(params.mu2);
  out.p22 = inverse_logit(params.mu2 + params.d);
  const double w = params.w;
  out.p_mix_control = w * out.p11 + (1.0 - w) * out.p21;
  out.p_mix_active = w * out.p12 + (1.0 - w) * out.p22;
  out.log_or_mix = log_odds_ratio(out.p_mix_control, out.p_mix_active);
  out.or_mix = std::exp(out.log_or_mix);
  if (params.d != 0.0) out.attenuation_factor = out.log_or_mix / params.d;
  return out;
}

double naive_average_log_or(std::span<const double> log_ors) {
  if (log_ors.empty()) throw std::invalid_argument("naive_average_log_or: empty list");
  return std::accumulate(log_ors.begin(), log_ors.end(), 0.0) / static_cast<double>(log_ors.size());
}

StudyEffect observed_log_or(const ArmData& control, const ArmData& active) {
  StudyEffect out;
  out.study_id = control.study_id;
  out.degenerate = (control.events == 0 && active.events == 0) ||
                   (control.events == control.size && active.events == active.size);

  double r1 = static_cast<double>(control.events);
  double f1 = static_cast<double>(control.size - control.events);
  double r2 = static_cast<double>(active.events);
  double f2 = static_cast<double>(active.size - active.events);
  if (r1 == 0.0 || f1 == 0.0 || r2 == 0.0 || f2 == 0.0) {
    r1 += 0.5;
    f1 += 0.5;
    r2 += 0.5;
    f2 += 0.5;
    out.corrected = true;
  }
  out.estimate.log_or = std::log(r2 / f2) - std::log(r1 / f1);
  out.estimate.se = std::sqrt(1.0 / r1 + 1.0 / f1 + 1.0 / r2 + 1.0 / f2);
  return out;
}

StudyEffect observed_log_or(const Study& study) {
  return observed_log_or(study.control, study.active);
}

std::vector<StudyEffect> observed_effects(const Dataset& data) {
  std::vector<StudyEffect> out;
  out.reserve(data.study_count());
  for (const auto& s : data.studies()) out.push_back(observed_log_or(s));
  return out;
}

PooledEstimate inverse_variance_pool(std::span<const PooledEstimate> estimates) {
  if (estimates.empty()) throw std::invalid_argument("inverse_variance_pool: empty list");
  double sum_w = 0.0;
  double sum_wx = 0.0;
  for (const auto& e : estimates) {
    if (!(e.se > 0.0) || !std::isfinite(e.se))
      throw std::invalid_argument("inverse_variance_pool: standard errors must be positive");
    const double w = 1.0 / (e.se * e.se);
    sum_w += w;
    sum_wx += w * e.log_or;
  }
  return {sum_wx / sum_w, 1.0 / std::sqrt(sum_w)};
}

PooledEstimate naive_pool(const Dataset& data) {
  std::vector<PooledEstimate> kept;
  for (const auto& e : observed_effects(data))
    if (!e.degenerate) kept.push_back(e.estimate);
  if (kept.empty()) throw std::invalid_argument("naive_pool: every study is degenerate");
  return inverse_variance_pool(kept);
}

double empirical_logit(const ArmData& arm) {
  double r = static_cast<double>(arm.events);
  double f = static_cast<double>(arm.size - arm.events);
  if (r == 0.0 || f == 0.0) {
    r += 0.5;
    f += 0.5;
  }
  return std::log(r / f);
}

}  // namespace bookend
