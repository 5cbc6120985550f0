#include "bookend/summary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace bookend {

const ParameterSummary& PosteriorSummary::at(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw std::out_of_range("parameter not in summary: " + name);
}

bool PosteriorSummary::contains(const std::string& name) const {
  return std::any_of(parameters.begin(), parameters.end(), [&](const auto& p) { return p.name == name; });
}

std::optional<double> PosteriorSummary::max_rhat() const {
  std::optional<double> out;
  for (const auto& p : parameters)
    if (p.rhat && (!out || *p.rhat > *out)) out = p.rhat;
  return out;
}

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace {

using Chains = std::vector<std::vector<double>>;

Chains split_chains(const Chains& chains) {
  Chains out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

// Replaces every draw by the normal score of its pooled fractional rank
// (Blom offset), with average ranks for ties.
Chains rank_normalize(const Chains& chains) {
  struct Entry {
    double value;
    std::size_t chain;
    std::size_t index;
  };
  std::vector<Entry> all;
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (std::size_t i = 0; i < chains[c].size(); ++i) all.push_back({chains[c][i], c, i});
  std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });

  const double total = static_cast<double>(all.size());
  const boost::math::normal standard;
  Chains out(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c) out[c].resize(chains[c].size());

  for (std::size_t start = 0; start < all.size();) {
    std::size_t end = start;
    while (end < all.size() && all[end].value == all[start].value) ++end;
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    const double z = boost::math::quantile(standard, (rank - 0.375) / (total + 0.25));
    for (std::size_t k = start; k < end; ++k) out[all[k].chain][all[k].index] = z;
    start = end;
  }
  return out;
}

// Accumulated relative to the first value so constant input is exact.
double mean_of(const std::vector<double>& v) {
  const double shift = v.front();
  double total = 0.0;
  for (double x : v) total += x - shift;
  return shift + total / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

void require_shape(const Chains& chains) {
  if (chains.empty()) throw std::invalid_argument("no chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != n) throw std::invalid_argument("chains must have equal length");
  if (n < 4) throw std::invalid_argument("chains too short to split");
}

std::optional<double> rhat_of(const Chains& split) {
  const double n = static_cast<double>(split.front().size());
  std::vector<double> means;
  double within = 0.0;
  for (const auto& c : split) {
    const double m = mean_of(c);
    means.push_back(m);
    within += sample_variance(c, m);
  }
  within /= static_cast<double>(split.size());
  if (!(within > 0.0)) return std::nullopt;
  const double between = n * sample_variance(means, mean_of(means));
  const double var_plus = (n - 1.0) / n * within + between / n;
  // Sub-unit values only arise from sampling noise in the between-chain term.
  return std::max(1.0, std::sqrt(var_plus / within));
}

std::optional<double> ess_of(const Chains& split) {
  const std::size_t m = split.size();
  const std::size_t n = split.front().size();
  const double nd = static_cast<double>(n);

  std::vector<double> means(m);
  std::vector<double> vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = mean_of(split[c]);
    vars[c] = sample_variance(split[c], means[c]);
  }
  const double mean_var = mean_of(vars);
  if (!(mean_var > 0.0)) return std::nullopt;
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (m > 1) var_plus += sample_variance(means, mean_of(means));

  // Mean over chains of the biased autocovariance at `lag`.
  const auto mean_acov = [&](std::size_t lag) {
    double total = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const auto& x = split[c];
      double s = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - means[c]) * (x[i + lag] - means[c]);
      total += s / nd;
    }
    return total / static_cast<double>(m);
  };
  const auto rho = [&](std::size_t lag) { return 1.0 - (mean_var - mean_acov(lag)) / var_plus; };

  std::vector<double> rho_hat(n + 2, 0.0);
  double rho_even = 1.0;
  double rho_odd = rho(1);
  rho_hat[0] = rho_even;
  rho_hat[1] = rho_odd;

  // Geyer's initial positive sequence.
  std::size_t s = 1;
  while (s + 4 < n && rho_even + rho_odd > 0.0) {
    rho_even = rho(s + 1);
    rho_odd = rho(s + 2);
    if (rho_even + rho_odd >= 0.0) {
      rho_hat[s + 1] = rho_even;
      rho_hat[s + 2] = rho_odd;
    }
    s += 2;
  }
  const std::size_t max_s = s;
  if (rho_even > 0.0) rho_hat[max_s + 1] = rho_even;

  // Initial monotone sequence.
  for (std::size_t k = 1; k + 3 <= max_s; k += 2) {
    if (rho_hat[k + 1] + rho_hat[k + 2] > rho_hat[k - 1] + rho_hat[k]) {
      rho_hat[k + 1] = 0.5 * (rho_hat[k - 1] + rho_hat[k]);
      rho_hat[k + 2] = rho_hat[k + 1];
    }
  }

  double tau = -1.0 + rho_hat[max_s + 1];
  for (std::size_t k = 0; k < max_s; ++k) tau += 2.0 * rho_hat[k];
  const double total = static_cast<double>(m) * nd;
  if (!(tau > 0.0)) return total;
  return std::min(total / tau, total);
}

}  // namespace

std::optional<double> split_rhat(const Chains& chains) {
  require_shape(chains);
  return rhat_of(rank_normalize(split_chains(chains)));
}

std::optional<double> bulk_ess(const Chains& chains) {
  require_shape(chains);
  return ess_of(rank_normalize(split_chains(chains)));
}

PosteriorSummary summarize(const ChainSet& chains) {
  if (chains.chain_count() < 2) throw std::invalid_argument("summarize needs at least two chains");
  if (chains.draw_count() < 100) throw std::invalid_argument("summarize needs at least 100 draws per chain");

  PosteriorSummary out;
  out.total_draws = chains.chain_count() * chains.draw_count();
  for (std::size_t p = 0; p < chains.parameter_count(); ++p) {
    ParameterSummary s;
    s.name = chains.names[p];
    std::vector<double> pooled = chains.pooled(p);
    s.mean = mean_of(pooled);
    s.sd = std::sqrt(sample_variance(pooled, s.mean));
    std::sort(pooled.begin(), pooled.end());
    s.q025 = quantile_sorted(pooled, 0.025);
    s.q50 = quantile_sorted(pooled, 0.5);
    s.q975 = quantile_sorted(pooled, 0.975);

    Chains per_chain;
    for (const auto& c : chains.draws) per_chain.push_back(c[p]);
    s.rhat = split_rhat(per_chain);
    s.ess = bulk_ess(per_chain);
    out.parameters.push_back(std::move(s));
  }
  return out;
}

}  // namespace bookend
