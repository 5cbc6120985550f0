#include "bookend/models.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bookend {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sd) - 0.5 * z * z;
}

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::StandardFE:
      return "standard-fe";
    case ModelKind::StandardRE:
      return "standard-re";
    case ModelKind::Bookend:
      return "bookend";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "standard-fe") return ModelKind::StandardFE;
  if (text == "standard-re") return ModelKind::StandardRE;
  if (text == "bookend") return ModelKind::Bookend;
  throw std::invalid_argument("unknown model: " + text);
}

std::string to_string(ParameterRole role) {
  switch (role) {
    case ParameterRole::Baseline:
      return "baseline";
    case ParameterRole::Effect:
      return "effect";
    case ParameterRole::StudyEffect:
      return "study-effect";
    case ParameterRole::Heterogeneity:
      return "heterogeneity";
    case ParameterRole::Mixing:
      return "mixing";
  }
  return "unknown";
}

void ModelSpec::validate(const Dataset& data) const {
  if (!(prior_sd_logodds > 0.0)) throw std::invalid_argument("prior sd must be positive");
  if (data.study_count() < 1) throw std::invalid_argument("no studies");
  switch (kind) {
    case ModelKind::StandardFE:
      break;
    case ModelKind::StandardRE:
      if (!(tau_prior_scale > 0.0)) throw std::invalid_argument("tau prior scale must be positive");
      if (fixed_tau && !(*fixed_tau > 0.0)) throw std::invalid_argument("fixed tau must be positive");
      break;
    case ModelKind::Bookend:
      if (data.study_count() < 3) throw std::invalid_argument("bookend model needs at least 3 studies");
      if (bookend_low.empty() || bookend_high.empty())
        throw std::invalid_argument("bookend model needs both bookend study ids");
      if (bookend_low == bookend_high) throw std::invalid_argument("bookend studies must differ");
      if (!data.has_study(bookend_low)) throw std::invalid_argument("unknown bookend study: " + bookend_low);
      if (!data.has_study(bookend_high)) throw std::invalid_argument("unknown bookend study: " + bookend_high);
      break;
  }
}

Model::Model(Dataset data, ModelSpec spec) : data_(std::move(data)), spec_(std::move(spec)) {
  spec_.validate(data_);

  for (const auto& s : data_.studies()) {
    const auto term = [](const ArmData& a) {
      return ArmTerm{static_cast<double>(a.events), static_cast<double>(a.size - a.events),
                     log_choose(a.size, a.events)};
    };
    terms_.push_back({term(s.control), term(s.active)});
  }

  const auto add = [this](std::string name, Support support, ParameterRole role, std::string study) {
    space_.add(name, support);
    params_.push_back({std::move(name), role, std::move(study)});
  };

  const auto& studies = data_.studies();
  switch (spec_.kind) {
    case ModelKind::StandardFE:
      for (const auto& s : studies) add("mu[" + s.id + "]", Support::Real, ParameterRole::Baseline, s.id);
      add("d", Support::Real, ParameterRole::Effect, "");
      break;
    case ModelKind::StandardRE:
      for (const auto& s : studies) add("mu[" + s.id + "]", Support::Real, ParameterRole::Baseline, s.id);
      for (const auto& s : studies) add("eta[" + s.id + "]", Support::Real, ParameterRole::StudyEffect, s.id);
      add("d", Support::Real, ParameterRole::Effect, "");
      if (!spec_.fixed_tau) add("tau", Support::Positive, ParameterRole::Heterogeneity, "");
      for (const auto& s : studies) derived_.push_back({"delta[" + s.id + "]", ParameterRole::StudyEffect, s.id, true});
      break;
    case ModelKind::Bookend:
      low_ = data_.study_index(spec_.bookend_low);
      high_ = data_.study_index(spec_.bookend_high);
      add("mu_low", Support::Real, ParameterRole::Baseline, spec_.bookend_low);
      add("mu_high", Support::Real, ParameterRole::Baseline, spec_.bookend_high);
      add("d", Support::Real, ParameterRole::Effect, "");
      for (std::size_t j = 0; j < studies.size(); ++j) {
        if (j == low_ || j == high_) continue;
        mixed_.push_back(j);
        add("w[" + studies[j].id + "]", Support::UnitInterval, ParameterRole::Mixing, studies[j].id);
      }
      break;
  }
}

std::vector<double> Model::initial_values() const {
  std::vector<double> init;
  const auto& studies = data_.studies();
  switch (spec_.kind) {
    case ModelKind::StandardFE:
      for (const auto& s : studies) init.push_back(empirical_logit(s.control));
      init.push_back(0.0);
      break;
    case ModelKind::StandardRE:
      for (const auto& s : studies) init.push_back(empirical_logit(s.control));
      init.insert(init.end(), studies.size(), 0.0);
      init.push_back(0.0);
      if (!spec_.fixed_tau) init.push_back(0.5);
      break;
    case ModelKind::Bookend:
      init.push_back(empirical_logit(studies[low_].control));
      init.push_back(empirical_logit(studies[high_].control));
      init.push_back(0.0);
      init.insert(init.end(), mixed_.size(), 0.5);
      break;
  }
  return init;
}

namespace {

struct ArmLog {
  double log_p;
  double log_q;
};

ArmLog logistic_arm(double eta) { return {log_inverse_logit(eta), log_inverse_logit(-eta)}; }

}  // namespace

double Model::arm_loglik(const ArmTerm& term, double log_p, double log_q) {
  double s = term.log_choose;
  if (term.events > 0.0) s += term.events * log_p;
  if (term.failures > 0.0) s += term.failures * log_q;
  return s;
}

double Model::fe_likelihood(std::span<const double> theta) const {
  const std::size_t J = terms_.size();
  const double d = theta[J];
  double sum = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const ArmLog c = logistic_arm(theta[j]);
    const ArmLog a = logistic_arm(theta[j] + d);
    sum += arm_loglik(terms_[j].control, c.log_p, c.log_q) + arm_loglik(terms_[j].active, a.log_p, a.log_q);
  }
  return sum;
}

double Model::re_likelihood(std::span<const double> mu, std::span<const double> delta) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const ArmLog c = logistic_arm(mu[j]);
    const ArmLog a = logistic_arm(mu[j] + delta[j]);
    sum += arm_loglik(terms_[j].control, c.log_p, c.log_q) + arm_loglik(terms_[j].active, a.log_p, a.log_q);
  }
  return sum;
}

double Model::tau_of(std::span<const double> theta) const {
  return spec_.fixed_tau ? *spec_.fixed_tau : theta[2 * terms_.size() + 1];
}

std::vector<double> Model::derived_values(std::span<const double> theta) const {
  if (spec_.kind != ModelKind::StandardRE) return {};
  const std::size_t J = terms_.size();
  const double d = theta[2 * J];
  const double tau = tau_of(theta);
  std::vector<double> delta(J);
  for (std::size_t j = 0; j < J; ++j) delta[j] = d + tau * theta[J + j];
  return delta;
}

double Model::centered_re_log_posterior(std::span<const double> theta) const {
  if (spec_.kind != ModelKind::StandardRE) throw std::invalid_argument("not a random-effects model");
  if (theta.size() != space_.size()) throw std::invalid_argument("parameter vector has the wrong length");
  for (double v : theta)
    if (!std::isfinite(v)) return kNegInf;
  const std::size_t J = terms_.size();
  const double d = theta[2 * J];
  const double tau = tau_of(theta);
  if (!(tau > 0.0)) return kNegInf;
  const double sd = spec_.prior_sd_logodds;
  double lp = normal_log_pdf(d, 0.0, sd);
  for (std::size_t j = 0; j < J; ++j) {
    lp += normal_log_pdf(theta[j], 0.0, sd);
    lp += normal_log_pdf(theta[J + j], d, tau);
  }
  if (!spec_.fixed_tau) lp += std::log(2.0) + normal_log_pdf(tau, 0.0, spec_.tau_prior_scale);
  return lp + re_likelihood(theta.subspan(0, J), theta.subspan(J, J));
}

double Model::bookend_likelihood(std::span<const double> theta) const {
  const double mu_low = theta[0];
  const double mu_high = theta[1];
  const double d = theta[2];

  const ArmLog low_c = logistic_arm(mu_low);
  const ArmLog low_a = logistic_arm(mu_low + d);
  const ArmLog high_c = logistic_arm(mu_high);
  const ArmLog high_a = logistic_arm(mu_high + d);

  double sum = arm_loglik(terms_[low_].control, low_c.log_p, low_c.log_q) + arm_loglik(terms_[low_].active, low_a.log_p, low_a.log_q) +
               arm_loglik(terms_[high_].control, high_c.log_p, high_c.log_q) +
               arm_loglik(terms_[high_].active, high_a.log_p, high_a.log_q);

  const double p_low[2] = {std::exp(low_c.log_p), std::exp(low_a.log_p)};
  const double q_low[2] = {std::exp(low_c.log_q), std::exp(low_a.log_q)};
  const double p_high[2] = {std::exp(high_c.log_p), std::exp(high_a.log_p)};
  const double q_high[2] = {std::exp(high_c.log_q), std::exp(high_a.log_q)};

  for (std::size_t m = 0; m < mixed_.size(); ++m) {
    const double w = theta[3 + m];
    const auto& t = terms_[mixed_[m]];
    for (int k = 0; k < 2; ++k) {
      const ArmLog mix{std::log(w * p_low[k] + (1.0 - w) * p_high[k]),
                       std::log(w * q_low[k] + (1.0 - w) * q_high[k])};
      sum += k == 0 ? arm_loglik(t.control, mix.log_p, mix.log_q) : arm_loglik(t.active, mix.log_p, mix.log_q);
    }
  }
  return sum;
}

double Model::log_likelihood(std::span<const double> theta) const {
  if (theta.size() != space_.size()) throw std::invalid_argument("parameter vector has the wrong length");
  switch (spec_.kind) {
    case ModelKind::StandardFE:
      return fe_likelihood(theta);
    case ModelKind::StandardRE: {
      const std::size_t J = terms_.size();
      const std::vector<double> delta = derived_values(theta);
      return re_likelihood(theta.subspan(0, J), delta);
    }
    case ModelKind::Bookend:
      return bookend_likelihood(theta);
  }
  return kNegInf;
}

double Model::log_prior(std::span<const double> theta) const {
  if (theta.size() != space_.size()) throw std::invalid_argument("parameter vector has the wrong length");
  const double sd = spec_.prior_sd_logodds;
  const std::size_t J = terms_.size();
  double lp = 0.0;
  switch (spec_.kind) {
    case ModelKind::StandardFE:
      for (double v : theta) lp += normal_log_pdf(v, 0.0, sd);
      break;
    case ModelKind::StandardRE: {
      // Non-centered: eta[j] ~ N(0, 1) is the centered N(d, tau^2) prior on
      // delta[j] times the Jacobian tau.
      const double tau = tau_of(theta);
      if (!(tau > 0.0)) return kNegInf;
      for (std::size_t j = 0; j < J; ++j) {
        lp += normal_log_pdf(theta[j], 0.0, sd);
        lp += normal_log_pdf(theta[J + j], 0.0, 1.0);
      }
      lp += normal_log_pdf(theta[2 * J], 0.0, sd);
      if (!spec_.fixed_tau) lp += std::log(2.0) + normal_log_pdf(tau, 0.0, spec_.tau_prior_scale);
      break;
    }
    case ModelKind::Bookend:
      for (std::size_t i = 0; i < 3; ++i) lp += normal_log_pdf(theta[i], 0.0, sd);
      // Beta(1, 1) density is 1 on [0, 1].
      for (std::size_t m = 0; m < mixed_.size(); ++m) {
        const double w = theta[3 + m];
        if (!(w >= 0.0 && w <= 1.0)) return kNegInf;
      }
      break;
  }
  return lp;
}

double Model::log_posterior(std::span<const double> theta) const {
  for (double v : theta)
    if (!std::isfinite(v)) return kNegInf;
  const double prior = log_prior(theta);
  if (prior == kNegInf) return kNegInf;
  return prior + log_likelihood(theta);
}

double log_post_standard_fe(const Dataset& data, std::span<const double> theta, double prior_sd_logodds) {
  ModelSpec spec;
  spec.kind = ModelKind::StandardFE;
  spec.prior_sd_logodds = prior_sd_logodds;
  return Model(data, spec).log_posterior(theta);
}

double log_post_standard_re(const Dataset& data, const ModelSpec& spec, std::span<const double> theta) {
  if (spec.kind != ModelKind::StandardRE) throw std::invalid_argument("spec is not a random-effects model");
  return Model(data, spec).centered_re_log_posterior(theta);
}

double log_post_bookend(const Dataset& data, const ModelSpec& spec, std::span<const double> theta) {
  if (spec.kind != ModelKind::Bookend) throw std::invalid_argument("spec is not a bookend model");
  return Model(data, spec).log_posterior(theta);
}

std::string FitResult::study_parameter(const std::string& study_id) const {
  for (const auto& p : parameters)
    if (p.study_id == study_id && (p.role == ParameterRole::Baseline || p.role == ParameterRole::Mixing))
      return p.name;
  throw std::out_of_range("no baseline or mixing parameter for study " + study_id);
}

FitResult fit(const Dataset& data, const ModelSpec& spec, const SamplerConfig& cfg, Execution exec) {
  const Model model(data, spec);
  const auto density = [&model](std::span<const double> theta) { return model.log_posterior(theta); };
  const std::vector<double> init = model.initial_values();

  FitResult out;
  out.model = spec;
  out.parameters = model.parameters();
  out.chains = sample(density, model.space(), init, cfg, exec);

  const auto& derived = model.derived_parameters();
  if (!derived.empty()) {
    const std::size_t dim = model.space().size();
    std::vector<double> theta(dim);
    for (auto& chain : out.chains.draws) {
      std::vector<std::vector<double>> extra(derived.size(), std::vector<double>(chain[0].size()));
      for (std::size_t t = 0; t < chain[0].size(); ++t) {
        for (std::size_t i = 0; i < dim; ++i) theta[i] = chain[i][t];
        const std::vector<double> values = model.derived_values(theta);
        for (std::size_t k = 0; k < values.size(); ++k) extra[k][t] = values[k];
      }
      for (auto& e : extra) chain.push_back(std::move(e));
    }
    for (const auto& p : derived) {
      out.chains.names.push_back(p.name);
      out.parameters.push_back(p);
    }
  }
  out.summary = summarize(out.chains);

  out.converged = true;
  for (const auto& p : out.summary.parameters) {
    if (!p.rhat) {
      out.converged = false;
      out.warnings.push_back("R-hat undefined for " + p.name + " (constant draws)");
    } else if (*p.rhat >= 1.01) {
      out.converged = false;
      std::ostringstream msg;
      msg << "R-hat " << *p.rhat << " >= 1.01 for " << p.name;
      out.warnings.push_back(msg.str());
    }
  }
  return out;
}

}  // namespace bookend
