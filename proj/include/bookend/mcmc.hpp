#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bookend/parallel.hpp"

namespace bookend {

/// Domain of a parameter. Bounded parameters are sampled on an unbounded
/// scale (logit for the unit interval, log for the positive half-line) and
/// the Jacobian is added to the target.
enum class Support { Real, UnitInterval, Positive };

class ParameterSpace {
 public:
  /// Throws std::invalid_argument on a duplicate name.
  void add(std::string name, Support support = Support::Real);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<Support>& supports() const { return supports_; }
  std::size_t index_of(const std::string& name) const;

  bool contains(std::span<const double> x) const;

  double to_unbounded(std::size_t i, double x) const;
  double from_unbounded(std::size_t i, double z) const;
  /// log |dx/dz| at unbounded coordinate z.
  double log_jacobian(std::size_t i, double z) const;

 private:
  std::vector<std::string> names_;
  std::vector<Support> supports_;
};

struct SamplerConfig {
  int n_chains = 3;
  int burn_in = 2000;
  /// Retained draws summed over chains; each chain keeps ceil(total / n_chains).
  int retained_total = 10000;
  int thin = 2;
  std::uint64_t seed = 20240611;
  int adapt_window = 50;
  double target_accept = 0.44;
  double initial_step = 0.1;

  int retained_per_chain() const { return (retained_total + n_chains - 1) / n_chains; }
  void validate() const;
};

using LogDensity = std::function<double(std::span<const double>)>;

struct ChainSet {
  std::vector<std::string> names;
  /// draws[chain][parameter][draw]
  std::vector<std::vector<std::vector<double>>> draws;
  /// Post-burn-in acceptance rate per parameter, pooled over chains.
  std::vector<double> accept_rates;
  /// Step sizes on the unbounded scale after adaptation, per chain.
  std::vector<std::vector<double>> step_sizes;
  SamplerConfig config;

  std::size_t chain_count() const { return draws.size(); }
  std::size_t draw_count() const { return draws.empty() || draws[0].empty() ? 0 : draws[0][0].size(); }
  std::size_t parameter_count() const { return names.size(); }

  /// All chains of one parameter, concatenated.
  std::vector<double> pooled(std::size_t parameter) const;

  bool operator==(const ChainSet& other) const;
};

/// Component-wise adaptive random-walk Metropolis. Each chain's stream is
/// seeded with `cfg.seed ^ chain_index`; step sizes adapt during burn-in
/// only. Proposals with a NaN log density are rejected. Throws
/// std::invalid_argument when `init` is outside the supports or the log
/// density is not finite there.
///
/// `log_density` is called concurrently from several threads under
/// Execution::Parallel and must be reentrant.
ChainSet sample(const LogDensity& log_density, const ParameterSpace& space,
                std::span<const double> init, const SamplerConfig& cfg,
                Execution exec = Execution::Parallel);

/// Reference loop over chains; identical output to the OpenMP path.
ChainSet sample_serial(const LogDensity& log_density, const ParameterSpace& space,
                       std::span<const double> init, const SamplerConfig& cfg);

}  // namespace bookend
