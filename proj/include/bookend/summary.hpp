#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bookend/mcmc.hpp"

namespace bookend {

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
  /// Rank-normalized split R-hat; empty when the draws are constant.
  std::optional<double> rhat;
  /// Bulk effective sample size; empty when the draws are constant.
  std::optional<double> ess;

  bool operator==(const ParameterSummary&) const = default;
};

struct PosteriorSummary {
  std::vector<ParameterSummary> parameters;
  std::size_t total_draws = 0;

  const ParameterSummary& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  /// Largest defined R-hat, or empty if none is defined.
  std::optional<double> max_rhat() const;
};

/// Requires at least two chains of at least 100 draws each.
PosteriorSummary summarize(const ChainSet& chains);

/// Quantile by linear interpolation between order statistics
/// (h = (n - 1) p). `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double prob);

/// Both take chains of equal length; each chain is split in half.
std::optional<double> split_rhat(const std::vector<std::vector<double>>& chains);
std::optional<double> bulk_ess(const std::vector<std::vector<double>>& chains);

}  // namespace bookend
