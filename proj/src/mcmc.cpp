#include "bookend/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

#include "bookend/meta_core.hpp"
#include "bookend/rng.hpp"

namespace bookend {

void ParameterSpace::add(std::string name, Support support) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end())
    throw std::invalid_argument("duplicate parameter name: " + name);
  names_.push_back(std::move(name));
  supports_.push_back(support);
}

std::size_t ParameterSpace::index_of(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw std::out_of_range("unknown parameter: " + name);
  return static_cast<std::size_t>(it - names_.begin());
}

bool ParameterSpace::contains(std::span<const double> x) const {
  if (x.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!std::isfinite(x[i])) return false;
    switch (supports_[i]) {
      case Support::Real:
        break;
      case Support::UnitInterval:
        if (!(x[i] > 0.0 && x[i] < 1.0)) return false;
        break;
      case Support::Positive:
        if (!(x[i] > 0.0)) return false;
        break;
    }
  }
  return true;
}

double ParameterSpace::to_unbounded(std::size_t i, double x) const {
  switch (supports_[i]) {
    case Support::UnitInterval:
      return logit(x);
    case Support::Positive:
      return std::log(x);
    case Support::Real:
      break;
  }
  return x;
}

double ParameterSpace::from_unbounded(std::size_t i, double z) const {
  switch (supports_[i]) {
    case Support::UnitInterval:
      return inverse_logit(z);
    case Support::Positive:
      return std::exp(z);
    case Support::Real:
      break;
  }
  return z;
}

double ParameterSpace::log_jacobian(std::size_t i, double z) const {
  switch (supports_[i]) {
    case Support::UnitInterval:
      return log_inverse_logit(z) + log_inverse_logit(-z);
    case Support::Positive:
      return z;
    case Support::Real:
      break;
  }
  return 0.0;
}

void SamplerConfig::validate() const {
  if (n_chains < 1) throw std::invalid_argument("n_chains must be positive");
  if (burn_in < 0) throw std::invalid_argument("burn_in must be non-negative");
  if (retained_total < 1) throw std::invalid_argument("retained draws must be positive");
  if (thin < 1) throw std::invalid_argument("thin must be at least 1");
  if (adapt_window < 1) throw std::invalid_argument("adapt_window must be positive");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw std::invalid_argument("target_accept must lie in (0, 1)");
  if (!(initial_step > 0.0)) throw std::invalid_argument("initial_step must be positive");
}

std::vector<double> ChainSet::pooled(std::size_t parameter) const {
  std::vector<double> out;
  out.reserve(chain_count() * draw_count());
  for (const auto& chain : draws) out.insert(out.end(), chain[parameter].begin(), chain[parameter].end());
  return out;
}

bool ChainSet::operator==(const ChainSet& other) const {
  return names == other.names && draws == other.draws && accept_rates == other.accept_rates &&
         step_sizes == other.step_sizes;
}

namespace {

struct ChainOutput {
  std::vector<std::vector<double>> draws;
  std::vector<std::int64_t> accepted;
  std::vector<double> steps;
};

void validate_start(const LogDensity& log_density, const ParameterSpace& space,
                    std::span<const double> init, const SamplerConfig& cfg) {
  cfg.validate();
  if (space.size() == 0) throw std::invalid_argument("empty parameter space");
  if (!space.contains(init)) throw std::invalid_argument("initial values outside parameter supports");
  const double lp = log_density(init);
  if (!std::isfinite(lp)) throw std::invalid_argument("log density is not finite at the initial values");
}

ChainOutput run_chain(const LogDensity& log_density, const ParameterSpace& space,
                      std::span<const double> init, const SamplerConfig& cfg, int chain) {
  const std::size_t dim = space.size();
  const int retained = cfg.retained_per_chain();
  const std::int64_t iterations =
      static_cast<std::int64_t>(cfg.burn_in) + static_cast<std::int64_t>(retained) * cfg.thin;

  Rng rng(cfg.seed ^ static_cast<std::uint64_t>(chain));

  std::vector<double> x(init.begin(), init.end());
  std::vector<double> z(dim);
  std::vector<double> jac(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    z[i] = space.to_unbounded(i, x[i]);
    jac[i] = space.log_jacobian(i, z[i]);
  }
  double log_target = log_density(x);

  ChainOutput out;
  out.draws.assign(dim, std::vector<double>());
  for (auto& d : out.draws) d.reserve(static_cast<std::size_t>(retained));
  out.accepted.assign(dim, 0);
  out.steps.assign(dim, cfg.initial_step);

  std::vector<int> window_accepts(dim, 0);
  int batch = 0;

  for (std::int64_t it = 0; it < iterations; ++it) {
    const bool burning = it < cfg.burn_in;
    for (std::size_t i = 0; i < dim; ++i) {
      const double z_old = z[i];
      const double x_old = x[i];
      const double z_new = z_old + out.steps[i] * rng.normal();
      const double log_u = std::log(rng.uniform());

      x[i] = space.from_unbounded(i, z_new);
      const double lp_new = log_density(x);
      const double jac_new = space.log_jacobian(i, z_new);
      const double log_ratio = (lp_new - log_target) + (jac_new - jac[i]);

      if (!std::isnan(lp_new) && log_u < log_ratio) {
        z[i] = z_new;
        jac[i] = jac_new;
        log_target = lp_new;
        if (burning)
          ++window_accepts[i];
        else
          ++out.accepted[i];
      } else {
        x[i] = x_old;
      }
    }

    if (burning && (it + 1) % cfg.adapt_window == 0) {
      ++batch;
      const double gain = std::min(1.0, 3.0 / std::sqrt(static_cast<double>(batch)));
      for (std::size_t i = 0; i < dim; ++i) {
        const double rate = static_cast<double>(window_accepts[i]) / cfg.adapt_window;
        out.steps[i] *= std::exp(gain * (rate - cfg.target_accept));
        window_accepts[i] = 0;
      }
    }

    if (!burning && (it - cfg.burn_in + 1) % cfg.thin == 0)
      for (std::size_t i = 0; i < dim; ++i) out.draws[i].push_back(x[i]);
  }
  return out;
}

ChainSet assemble(std::vector<ChainOutput> outputs, const ParameterSpace& space, const SamplerConfig& cfg) {
  ChainSet set;
  set.names = space.names();
  set.config = cfg;
  const std::size_t dim = space.size();
  set.accept_rates.assign(dim, 0.0);
  const double post_iterations =
      static_cast<double>(cfg.retained_per_chain()) * cfg.thin * static_cast<double>(outputs.size());
  for (auto& out : outputs) {
    for (std::size_t i = 0; i < dim; ++i) set.accept_rates[i] += static_cast<double>(out.accepted[i]);
    set.step_sizes.push_back(std::move(out.steps));
    set.draws.push_back(std::move(out.draws));
  }
  for (auto& r : set.accept_rates) r /= post_iterations;
  return set;
}

}  // namespace

ChainSet sample_serial(const LogDensity& log_density, const ParameterSpace& space,
                       std::span<const double> init, const SamplerConfig& cfg) {
  validate_start(log_density, space, init, cfg);
  std::vector<ChainOutput> outputs;
  outputs.reserve(static_cast<std::size_t>(cfg.n_chains));
  for (int c = 0; c < cfg.n_chains; ++c) outputs.push_back(run_chain(log_density, space, init, cfg, c));
  return assemble(std::move(outputs), space, cfg);
}

ChainSet sample(const LogDensity& log_density, const ParameterSpace& space,
                std::span<const double> init, const SamplerConfig& cfg, Execution exec) {
  if (exec == Execution::Serial) return sample_serial(log_density, space, init, cfg);

  validate_start(log_density, space, init, cfg);
  std::vector<ChainOutput> outputs(static_cast<std::size_t>(cfg.n_chains));
  std::vector<std::exception_ptr> errors(outputs.size());

#pragma omp parallel for schedule(static, 1)
  for (int c = 0; c < cfg.n_chains; ++c) {
    try {
      outputs[static_cast<std::size_t>(c)] = run_chain(log_density, space, init, cfg, c);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }

  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return assemble(std::move(outputs), space, cfg);
}

}  // namespace bookend
