#include "bookend/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>

#include "bookend/models.hpp"
#include "bookend/rng.hpp"

namespace bookend {

void SimDesign::validate() const {
  scenario.validate();
  if (studies.empty()) throw std::invalid_argument("design has no studies");
  for (const auto& s : studies) {
    if (s.arm_size < 1) throw std::invalid_argument("arm size must be at least 1");
    if (s.population == Population::Mixture && !(s.w >= 0.0 && s.w <= 1.0))
      throw std::invalid_argument("mixture w must lie in [0, 1]");
  }
}

SimDesign SimDesign::three_study(const ScenarioParams& scenario, std::uint64_t seed) {
  SimDesign design;
  design.scenario = scenario;
  design.seed = seed;
  design.studies = {{Population::Pop1, 1.0, scenario.arm_size},
                    {Population::Pop2, 0.0, scenario.arm_size},
                    {Population::Mixture, scenario.w, scenario.arm_size}};
  return design;
}

ArmProbabilities study_probabilities(const ScenarioParams& scenario, const SimStudy& study) {
  ScenarioParams mix = scenario;
  switch (study.population) {
    case Population::Pop1:
      mix.w = 1.0;
      break;
    case Population::Pop2:
      mix.w = 0.0;
      break;
    case Population::Mixture:
      mix.w = study.w;
      break;
  }
  const AttenuationReport r = exact_mixture_or(mix);
  return {r.p_mix_control, r.p_mix_active};
}

Dataset simulate(const SimDesign& design) {
  design.validate();
  std::vector<ArmData> arms;
  for (std::size_t j = 0; j < design.studies.size(); ++j) {
    const auto& study = design.studies[j];
    const ArmProbabilities p = study_probabilities(design.scenario, study);
    Rng rng(derive_seed(design.seed, j));
    const std::string id = std::to_string(j + 1);
    std::binomial_distribution<std::int64_t> control(study.arm_size, p.control);
    std::binomial_distribution<std::int64_t> active(study.arm_size, p.active);
    arms.push_back({id, Treatment::Control, control(rng.engine()), study.arm_size});
    arms.push_back({id, Treatment::Active, active(rng.engine()), study.arm_size});
  }
  return Dataset(std::move(arms));
}

double analytic_fe_limit(const SimDesign& design) {
  design.validate();
  double sum_w = 0.0;
  double sum_wx = 0.0;
  for (const auto& study : design.studies) {
    const ArmProbabilities p = study_probabilities(design.scenario, study);
    const double n = static_cast<double>(study.arm_size);
    const double var = 1.0 / (n * p.control * (1.0 - p.control)) + 1.0 / (n * p.active * (1.0 - p.active));
    sum_w += 1.0 / var;
    sum_wx += log_odds_ratio(p.control, p.active) / var;
  }
  return sum_wx / sum_w;
}

std::vector<SweepCell> sweep_grid(const std::vector<double>& gaps, const std::vector<double>& ws,
                                  const std::vector<double>& ds) {
  std::vector<SweepCell> cells;
  for (double g : gaps)
    for (double w : ws)
      for (double d : ds) cells.push_back({g, w, d});
  return cells;
}

namespace {

SimDesign cell_design(const SweepOptions& options, const SweepCell& cell) {
  SimDesign design = options.design_template;
  design.scenario.mu2 = design.scenario.mu1 - cell.gap;
  design.scenario.d = cell.d;
  design.scenario.w = cell.w;
  for (auto& s : design.studies)
    if (s.population == Population::Mixture) s.w = cell.w;
  return design;
}

ModelSpec sweep_bookend_spec(const SimDesign& design) {
  ModelSpec spec;
  spec.kind = ModelKind::Bookend;
  for (std::size_t j = 0; j < design.studies.size(); ++j) {
    const std::string id = std::to_string(j + 1);
    if (design.studies[j].population == Population::Pop2 && spec.bookend_low.empty()) spec.bookend_low = id;
    if (design.studies[j].population == Population::Pop1 && spec.bookend_high.empty()) spec.bookend_high = id;
  }
  if (spec.bookend_low.empty() || spec.bookend_high.empty())
    throw std::invalid_argument("sweep template needs at least one Pop1 and one Pop2 study");
  return spec;
}

struct Replicate {
  double fe = 0.0;
  double bookend = 0.0;
};

Replicate run_replicate(const SweepOptions& options, const SweepCell& cell, std::size_t cell_index, int rep) {
  SimDesign design = cell_design(options, cell);
  design.seed = derive_seed(options.seed, cell_index, static_cast<std::uint64_t>(rep));
  const Dataset data = simulate(design);

  SamplerConfig cfg = options.sampler;
  cfg.seed = design.seed;
  ModelSpec fe;
  fe.kind = ModelKind::StandardFE;
  Replicate out;
  out.fe = fit(data, fe, cfg, Execution::Serial).effect().mean;
  out.bookend = fit(data, sweep_bookend_spec(design), cfg, Execution::Serial).effect().mean;
  return out;
}

void validate_sweep(const std::vector<SweepCell>& cells, const SweepOptions& options) {
  if (options.replications < 1) throw std::invalid_argument("replications must be at least 1");
  options.sampler.validate();
  for (const auto& cell : cells) {
    const SimDesign design = cell_design(options, cell);
    design.validate();
    sweep_bookend_spec(design);
  }
}

std::vector<SweepRow> aggregate(const std::vector<SweepCell>& cells, const SweepOptions& options,
                                const std::vector<Replicate>& reps) {
  const auto mean_se = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return std::pair{mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return std::pair{mean, sd / std::sqrt(static_cast<double>(v.size()))};
  };

  std::vector<SweepRow> rows;
  const auto R = static_cast<std::size_t>(options.replications);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> fe;
    std::vector<double> bk;
    for (std::size_t r = 0; r < R; ++r) {
      fe.push_back(reps[c * R + r].fe);
      bk.push_back(reps[c * R + r].bookend);
    }
    SweepRow row;
    row.cell = cells[c];
    row.replications = options.replications;
    std::tie(row.fe_mean, row.fe_se) = mean_se(fe);
    std::tie(row.bookend_mean, row.bookend_se) = mean_se(bk);

    const SimDesign design = cell_design(options, cells[c]);
    const AttenuationReport exact = exact_mixture_or(design.scenario);
    row.exact_log_or_mix = exact.log_or_mix;
    row.attenuation_factor = exact.attenuation_factor;
    row.fe_limit = analytic_fe_limit(design);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> bias_sweep_serial(const std::vector<SweepCell>& cells, const SweepOptions& options) {
  validate_sweep(cells, options);
  const auto R = static_cast<std::size_t>(options.replications);
  std::vector<Replicate> reps(cells.size() * R);
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (std::size_t r = 0; r < R; ++r) reps[c * R + r] = run_replicate(options, cells[c], c, static_cast<int>(r));
  return aggregate(cells, options, reps);
}

std::vector<SweepRow> bias_sweep(const std::vector<SweepCell>& cells, const SweepOptions& options,
                                 Execution exec) {
  if (exec == Execution::Serial) return bias_sweep_serial(cells, options);

  validate_sweep(cells, options);
  const auto R = static_cast<std::size_t>(options.replications);
  const auto total = static_cast<std::int64_t>(cells.size() * R);
  std::vector<Replicate> reps(static_cast<std::size_t>(total));
  std::vector<std::exception_ptr> errors(reps.size());

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < total; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    try {
      reps[idx] = run_replicate(options, cells[idx / R], idx / R, static_cast<int>(idx % R));
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }

  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return aggregate(cells, options, reps);
}

}  // namespace bookend
