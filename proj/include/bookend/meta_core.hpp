#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bookend {

enum class Treatment { Control = 1, Active = 2 };

/// Binomial counts for one arm of one study.
struct ArmData {
  std::string study_id;
  Treatment treatment = Treatment::Control;
  std::int64_t events = 0;
  std::int64_t size = 0;

  bool operator==(const ArmData&) const = default;
};

/// The control/active pair of a single study, in dataset order.
struct Study {
  std::string id;
  ArmData control;
  ArmData active;

  std::int64_t total_size() const { return control.size + active.size; }
};

/// Zero-size arms are only meaningful for prior-only runs.
enum class EmptyArms { Reject, Allow };

/// Pairwise meta-analysis data: every study has exactly one control and one
/// active arm. Arm order is preserved as given; studies are ordered by first
/// appearance.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<ArmData> arms, EmptyArms empty = EmptyArms::Reject);

  const std::vector<ArmData>& arms() const { return arms_; }
  const std::vector<Study>& studies() const { return studies_; }
  std::size_t study_count() const { return studies_.size(); }

  /// Index of the study with this id; throws std::out_of_range if absent.
  std::size_t study_index(const std::string& id) const;
  bool has_study(const std::string& id) const;

  bool operator==(const Dataset& other) const { return arms_ == other.arms_; }

 private:
  std::vector<ArmData> arms_;
  std::vector<Study> studies_;
};

/// Generative truth for the two-population example. `w` is the population-1
/// share of a mixed study. The regression-form coefficients are aliases.
struct ScenarioParams {
  double mu1 = 0.0;
  double mu2 = -2.0;
  double d = -0.5;
  double w = 0.5;
  std::int64_t arm_size = 1000;

  double beta0() const { return mu1; }
  double beta1() const { return mu2 - mu1; }
  double beta2() const { return d; }

  void validate() const;
};

struct AttenuationReport {
  double p11 = 0.0;
  double p12 = 0.0;
  double p21 = 0.0;
  double p22 = 0.0;
  double p_mix_control = 0.0;
  double p_mix_active = 0.0;
  double or_mix = 1.0;
  double log_or_mix = 0.0;
  /// log(OR_mix) / d; empty when d == 0.
  std::optional<double> attenuation_factor;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct PooledEstimate {
  double log_or = 0.0;
  double se = 0.0;

  Interval ci95() const { return {log_or - 1.96 * se, log_or + 1.96 * se}; }
};

/// Per-study observed effect. `corrected` is set when 0.5 was added to all
/// four cells; `degenerate` marks studies with no events or only events in
/// both arms, which are kept out of naive pooling.
struct StudyEffect {
  std::string study_id;
  PooledEstimate estimate;
  bool corrected = false;
  bool degenerate = false;
};

/// Numerically stable logistic function; throws std::domain_error on
/// non-finite input.
double inverse_logit(double x);
double logit(double p);

/// log(sigmoid(x)) without overflow for large |x|.
double log_inverse_logit(double x);

double log_odds_ratio(double p_control, double p_active);

AttenuationReport exact_mixture_or(const ScenarioParams& params);

double naive_average_log_or(std::span<const double> log_ors);

StudyEffect observed_log_or(const ArmData& control, const ArmData& active);
StudyEffect observed_log_or(const Study& study);
std::vector<StudyEffect> observed_effects(const Dataset& data);

PooledEstimate inverse_variance_pool(std::span<const PooledEstimate> estimates);

/// Inverse-variance pool of the non-degenerate studies of `data`.
PooledEstimate naive_pool(const Dataset& data);

/// Empirical logit of an arm; 0.5 is added to both cells when either is zero.
double empirical_logit(const ArmData& arm);

}  // namespace bookend
