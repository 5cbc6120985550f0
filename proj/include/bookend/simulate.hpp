#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bookend/mcmc.hpp"
#include "bookend/meta_core.hpp"
#include "bookend/parallel.hpp"

namespace bookend {

enum class Population { Pop1, Pop2, Mixture };

struct SimStudy {
  Population population = Population::Pop1;
  /// Population-1 share; only read for Mixture studies.
  double w = 0.5;
  std::int64_t arm_size = 1000;
};

/// Studies are labelled "1", "2", ... in the order given.
struct SimDesign {
  ScenarioParams scenario;
  std::vector<SimStudy> studies;
  std::uint64_t seed = 1;

  void validate() const;

  /// Pop1, Pop2 and a Mixture(scenario.w) study, scenario.arm_size per arm.
  static SimDesign three_study(const ScenarioParams& scenario, std::uint64_t seed);
};

struct ArmProbabilities {
  double control;
  double active;
};

ArmProbabilities study_probabilities(const ScenarioParams& scenario, const SimStudy& study);

/// Binomial counts at the exact (mixture) probabilities. Each study draws
/// from its own stream derived from (seed, study index).
Dataset simulate(const SimDesign& design);

/// Large-sample limit of the standard fixed-effect estimate: the
/// inverse-variance blend of the design's exact per-study log odds ratios,
/// with variances from the expected counts.
double analytic_fe_limit(const SimDesign& design);

struct SweepCell {
  double gap = 2.0;  ///< mu1 - mu2
  double w = 0.5;
  double d = -0.5;
};

std::vector<SweepCell> sweep_grid(const std::vector<double>& gaps, const std::vector<double>& ws,
                                  const std::vector<double>& ds);

struct SweepOptions {
  /// Study layout and mu1; the cell supplies mu2 = mu1 - gap, w and d.
  SimDesign design_template = SimDesign::three_study({}, 1);
  int replications = 200;
  SamplerConfig sampler;
  std::uint64_t seed = 1;
};

struct SweepRow {
  SweepCell cell;
  int replications = 0;
  double fe_mean = 0.0;
  double fe_se = 0.0;
  double bookend_mean = 0.0;
  double bookend_se = 0.0;
  double exact_log_or_mix = 0.0;
  std::optional<double> attenuation_factor;
  double fe_limit = 0.0;
};

/// Monte Carlo means of the standard-FE and bookend posterior means of d per
/// cell. Replication (c, r) simulates with seed derive_seed(seed, c, r) and
/// fits with the same seed. The bookends are the first Pop2 study (low) and
/// the first Pop1 study (high) of the template.
std::vector<SweepRow> bias_sweep(const std::vector<SweepCell>& cells, const SweepOptions& options,
                                 Execution exec = Execution::Parallel);

std::vector<SweepRow> bias_sweep_serial(const std::vector<SweepCell>& cells, const SweepOptions& options);

}  // namespace bookend
