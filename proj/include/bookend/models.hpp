#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bookend/mcmc.hpp"
#include "bookend/meta_core.hpp"
#include "bookend/summary.hpp"

namespace bookend {

enum class ModelKind { StandardFE, StandardRE, Bookend };

std::string to_string(ModelKind kind);
/// Accepts "standard-fe", "standard-re", "bookend".
ModelKind parse_model_kind(const std::string& text);

struct ModelSpec {
  ModelKind kind = ModelKind::StandardFE;
  /// Bookend studies by id: lowest and highest baseline log-odds.
  std::string bookend_low;
  std::string bookend_high;
  /// Normal prior sd for every log-odds parameter (variance 100 by default).
  double prior_sd_logodds = 10.0;
  /// Half-normal scale for tau (random-effects only).
  double tau_prior_scale = 1.0;
  /// Holds tau at a constant instead of sampling it (random-effects only).
  std::optional<double> fixed_tau;

  /// Throws std::invalid_argument if the spec cannot be fitted to `data`.
  void validate(const Dataset& data) const;
};

enum class ParameterRole { Baseline, Effect, StudyEffect, Heterogeneity, Mixing };

std::string to_string(ParameterRole role);

struct ParameterInfo {
  std::string name;
  ParameterRole role;
  /// Owning study for per-study parameters, empty for global ones.
  std::string study_id;
  /// Computed from sampled parameters rather than sampled directly.
  bool derived = false;
};

/// Log posterior of one of the three models bound to a dataset. Parameter
/// layouts:
///   StandardFE: mu[j] for every study, then d
///   StandardRE: mu[j], eta[j], d, tau (tau omitted when fixed); the study
///               effects are sampled non-centered, delta[j] = d + tau * eta[j],
///               and reported as derived quantities
///   Bookend:    mu_low, mu_high, d, then w[m] for every non-bookend study
/// w[m] is the share of the low-baseline population in study m.
class Model {
 public:
  Model(Dataset data, ModelSpec spec);

  const Dataset& data() const { return data_; }
  const ModelSpec& spec() const { return spec_; }
  const ParameterSpace& space() const { return space_; }
  const std::vector<ParameterInfo>& parameters() const { return params_; }

  /// Data-informed starting point (empirical control logits, d = 0,
  /// w = 0.5, tau = 0.5, delta = 0).
  std::vector<double> initial_values() const;

  /// Quantities reported alongside the sampled parameters (delta[j] for the
  /// random-effects model, none otherwise).
  const std::vector<ParameterInfo>& derived_parameters() const { return derived_; }
  std::vector<double> derived_values(std::span<const double> theta) const;

  /// Random-effects log posterior in the centered parameterization
  /// (mu[j], delta[j], d, tau). Equals log_posterior of the non-centered
  /// layout minus J log(tau).
  double centered_re_log_posterior(std::span<const double> theta) const;

  double log_likelihood(std::span<const double> theta) const;
  double log_prior(std::span<const double> theta) const;
  /// Returns -inf outside the support; never throws on finite input.
  double log_posterior(std::span<const double> theta) const;

 private:
  struct ArmTerm {
    double events;
    double failures;
    double log_choose;
  };
  struct StudyTerms {
    ArmTerm control;
    ArmTerm active;
  };

  static double arm_loglik(const ArmTerm& term, double log_p, double log_q);
  double fe_likelihood(std::span<const double> theta) const;
  double re_likelihood(std::span<const double> mu, std::span<const double> delta) const;
  double tau_of(std::span<const double> theta) const;
  double bookend_likelihood(std::span<const double> theta) const;

  Dataset data_;
  ModelSpec spec_;
  ParameterSpace space_;
  std::vector<ParameterInfo> params_;
  std::vector<ParameterInfo> derived_;
  std::vector<StudyTerms> terms_;
  std::size_t low_ = 0;
  std::size_t high_ = 0;
  /// Study indices modelled as mixtures, in dataset order.
  std::vector<std::size_t> mixed_;
};

double log_post_standard_fe(const Dataset& data, std::span<const double> theta,
                            double prior_sd_logodds = 10.0);
double log_post_standard_re(const Dataset& data, const ModelSpec& spec, std::span<const double> theta);
double log_post_bookend(const Dataset& data, const ModelSpec& spec, std::span<const double> theta);

struct FitResult {
  ModelSpec model;
  std::vector<ParameterInfo> parameters;
  ChainSet chains;
  PosteriorSummary summary;
  /// All R-hat values defined and below 1.01.
  bool converged = false;
  std::vector<std::string> warnings;

  const ParameterSummary& effect() const { return summary.at("d"); }
  /// Name of the parameter carrying a study's baseline or mixing share.
  std::string study_parameter(const std::string& study_id) const;
};

FitResult fit(const Dataset& data, const ModelSpec& spec, const SamplerConfig& cfg,
              Execution exec = Execution::Parallel);

}  // namespace bookend
