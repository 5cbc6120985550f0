// Command-line front end: fit, diagnose, simulate, sweep, attenuation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bookend/forest_plot.hpp"
#include "bookend/io.hpp"
#include "bookend/meta_core.hpp"
#include "bookend/models.hpp"
#include "bookend/simulate.hpp"
#include "bookend/workflow.hpp"

namespace fs = std::filesystem;
using namespace bookend;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNotConverged = 2;
constexpr double kHardRhat = 1.05;

struct SamplerFlags {
  int chains = 3;
  int burn_in = 2000;
  int samples = 10000;
  int thin = 2;
  std::uint64_t seed = SamplerConfig{}.seed;
  int threads = 0;

  SamplerConfig config() const {
    SamplerConfig cfg;
    cfg.n_chains = chains;
    cfg.burn_in = burn_in;
    cfg.retained_total = samples;
    cfg.thin = thin;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }
};

void add_sampler_flags(CLI::App* cmd, SamplerFlags& f) {
  cmd->add_option("--chains", f.chains, "Number of chains")->capture_default_str();
  cmd->add_option("--burn-in", f.burn_in, "Burn-in iterations per chain")->capture_default_str();
  cmd->add_option("--samples", f.samples, "Retained draws summed over chains")->capture_default_str();
  cmd->add_option("--thin", f.thin, "Thinning interval")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  cmd->add_option("--threads", f.threads, "OpenMP threads (0 = runtime default)");
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void write_report(const fs::path& dir, const nlohmann::json& report) {
  write_file(dir / "report.json", report.dump(2) + "\n");
}

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

bool hard_failure(const FitResult& f) {
  const auto r = f.summary.max_rhat();
  if (!r) return true;
  for (const auto& p : f.summary.parameters)
    if (!p.rhat || *p.rhat >= kHardRhat) return true;
  return false;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw std::invalid_argument("empty list: " + text);
  return out;
}

std::vector<SimStudy> parse_layout(const std::string& text, double w, std::int64_t n) {
  std::vector<SimStudy> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "pop1")
      out.push_back({Population::Pop1, 1.0, n});
    else if (item == "pop2")
      out.push_back({Population::Pop2, 0.0, n});
    else if (item == "mix")
      out.push_back({Population::Mixture, w, n});
    else
      throw std::invalid_argument("unknown study type '" + item + "' (expected pop1, pop2 or mix)");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian pairwise meta-analysis with bookend mixture correction for odds-ratio attenuation"};
  app.require_subcommand(1);

  std::string input;
  std::string out_dir = "out";
  std::string model = "standard-fe";
  std::string bookend_low;
  std::string bookend_high;
  double spread_threshold = 1.0;
  SamplerFlags sampler;

  auto* fit_cmd = app.add_subcommand("fit", "Fit one model to an arm-level data file");
  fit_cmd->add_option("input", input, "CSV with columns study,treatment,events,n")->required();
  fit_cmd->add_option("--model", model, "standard-fe | standard-re | bookend")->capture_default_str();
  fit_cmd->add_option("--bookend-low", bookend_low, "Study id of the low-baseline bookend");
  fit_cmd->add_option("--bookend-high", bookend_high, "Study id of the high-baseline bookend");
  fit_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
  add_sampler_flags(fit_cmd, sampler);

  auto* diag_cmd = app.add_subcommand("diagnose", "Baseline spread, bookend selection and FE-vs-bookend comparison");
  diag_cmd->add_option("input", input, "CSV with columns study,treatment,events,n")->required();
  diag_cmd->add_option("--bookend-low", bookend_low, "Override the low bookend");
  diag_cmd->add_option("--bookend-high", bookend_high, "Override the high bookend");
  diag_cmd->add_option("--spread-threshold", spread_threshold, "Baseline spread flag threshold (log-odds)")
      ->capture_default_str();
  diag_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
  add_sampler_flags(diag_cmd, sampler);

  ScenarioParams scenario;
  std::string layout = "pop1,pop2,mix";
  std::optional<std::string> sim_out;
  std::uint64_t sim_seed = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a dataset from the two-population process");
  sim_cmd->add_option("--mu1", scenario.mu1, "Population-1 baseline log-odds")->capture_default_str();
  sim_cmd->add_option("--mu2", scenario.mu2, "Population-2 baseline log-odds")->capture_default_str();
  sim_cmd->add_option("--d", scenario.d, "Conditional log odds ratio")->capture_default_str();
  sim_cmd->add_option("--w", scenario.w, "Population-1 share of mixed studies")->capture_default_str();
  sim_cmd->add_option("--n", scenario.arm_size, "Individuals per arm")->capture_default_str();
  sim_cmd->add_option("--layout", layout, "Comma list of pop1, pop2, mix")->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--out", sim_out, "Output directory (CSV to stdout when absent)");

  std::string gaps = "0,1,2,4";
  std::string ws = "0.5";
  std::string ds = "-0.5";
  int reps = 200;
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo bias sweep over baseline gap, mixing share and effect");
  sweep_cmd->add_option("--gaps", gaps, "Comma list of mu1 - mu2")->capture_default_str();
  sweep_cmd->add_option("--ws", ws, "Comma list of mixing shares")->capture_default_str();
  sweep_cmd->add_option("--ds", ds, "Comma list of log odds ratios")->capture_default_str();
  sweep_cmd->add_option("--reps", reps, "Replications per cell")->capture_default_str();
  sweep_cmd->add_option("--mu1", scenario.mu1, "Population-1 baseline log-odds")->capture_default_str();
  sweep_cmd->add_option("--n", scenario.arm_size, "Individuals per arm")->capture_default_str();
  sweep_cmd->add_option("--layout", layout, "Comma list of pop1, pop2, mix")->capture_default_str();
  sweep_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
  add_sampler_flags(sweep_cmd, sampler);

  std::optional<std::string> att_out;
  auto* att_cmd = app.add_subcommand("attenuation", "Exact mixture odds ratio and attenuation factor");
  att_cmd->add_option("--mu1", scenario.mu1, "Population-1 baseline log-odds")->capture_default_str();
  att_cmd->add_option("--mu2", scenario.mu2, "Population-2 baseline log-odds")->capture_default_str();
  att_cmd->add_option("--d", scenario.d, "Conditional log odds ratio")->capture_default_str();
  att_cmd->add_option("--w", scenario.w, "Population-1 share")->capture_default_str();
  att_cmd->add_option("--out", att_out, "Also write report.json here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sampler.threads > 0) set_threads(sampler.threads);

    if (*fit_cmd) {
      const Dataset data = ingest(input);
      const SamplerConfig cfg = sampler.config();
      ModelSpec spec;
      spec.kind = parse_model_kind(model);
      nlohmann::json report = {{"command", "fit"}, {"input", input}, {"seed", cfg.seed}};

      if (spec.kind == ModelKind::Bookend) {
        if (bookend_low.empty() != bookend_high.empty())
          throw std::invalid_argument("give both --bookend-low and --bookend-high, or neither");
        if (bookend_low.empty()) {
          ModelSpec fe;
          const FitResult selection = fit(data, fe, cfg);
          const BookendPair pair = identify_bookends(data, selection);
          spec.bookend_low = pair.low;
          spec.bookend_high = pair.high;
          report["bookend_selection"] = {{"method", "standard-fe posterior means"},
                                         {"low", pair.low},
                                         {"high", pair.high}};
        } else {
          spec.bookend_low = bookend_low;
          spec.bookend_high = bookend_high;
          report["bookend_selection"] = {{"method", "user"}, {"low", bookend_low}, {"high", bookend_high}};
        }
      }

      const FitResult result = fit(data, spec, cfg);
      report["data"] = dataset_json(data);
      report["fit"] = fit_json(result);

      const fs::path dir = prepare_out(out_dir);
      write_report(dir, report);
      const std::string text = text_summary(data, result);
      write_file(dir / "summary.txt", text);
      write_file(dir / "forest.svg", render_forest_svg(forest_rows(data, {&result})));
      std::cout << text;
      if (hard_failure(result)) {
        std::cerr << "warning: chains did not converge (R-hat >= " << kHardRhat << ")\n";
        return kExitNotConverged;
      }
      return kExitOk;
    }

    if (*diag_cmd) {
      const Dataset data = ingest(input);
      const SamplerConfig cfg = sampler.config();
      WorkflowOptions options;
      options.spread_threshold = spread_threshold;
      if (bookend_low.empty() != bookend_high.empty())
        throw std::invalid_argument("give both --bookend-low and --bookend-high, or neither");
      if (!bookend_low.empty()) options.bookends = BookendPair{bookend_low, bookend_high};

      FitResult fe;
      FitResult bk;
      const DiagnosticsReport diag = sensitivity_compare(data, cfg, options, Execution::Parallel, &fe, &bk);
      const nlohmann::json report = {{"command", "diagnose"},
                                     {"input", input},
                                     {"seed", cfg.seed},
                                     {"data", dataset_json(data)},
                                     {"diagnostics", diag},
                                     {"standard_fe", fit_json(fe)},
                                     {"bookend", fit_json(bk)}};

      const fs::path dir = prepare_out(out_dir);
      write_report(dir, report);
      const std::string text = text_summary(diag);
      write_file(dir / "summary.txt", text);
      write_file(dir / "forest.svg", render_forest_svg(forest_rows(data, {&fe, &bk})));
      std::cout << text;
      if (hard_failure(fe) || hard_failure(bk)) {
        std::cerr << "warning: chains did not converge (R-hat >= " << kHardRhat << ")\n";
        return kExitNotConverged;
      }
      return kExitOk;
    }

    if (*sim_cmd) {
      SimDesign design;
      design.scenario = scenario;
      design.seed = sim_seed;
      design.studies = parse_layout(layout, scenario.w, scenario.arm_size);
      const Dataset data = simulate(design);
      if (!sim_out) {
        emit(data, std::cout);
        return kExitOk;
      }
      const fs::path dir = prepare_out(*sim_out);
      std::ofstream csv(dir / "data.csv");
      emit(data, csv);
      write_report(dir, {{"command", "simulate"},
                         {"seed", sim_seed},
                         {"scenario", attenuation_json(scenario, exact_mixture_or(scenario))},
                         {"layout", layout},
                         {"data", dataset_json(data)}});
      std::cout << "wrote " << (dir / "data.csv").string() << '\n';
      return kExitOk;
    }

    if (*sweep_cmd) {
      SweepOptions options;
      options.design_template.scenario = scenario;
      options.design_template.studies = parse_layout(layout, scenario.w, scenario.arm_size);
      options.replications = reps;
      options.sampler = sampler.config();
      options.seed = sampler.seed;
      const auto cells = sweep_grid(parse_list(gaps), parse_list(ws), parse_list(ds));
      const auto rows = bias_sweep(cells, options);

      const fs::path dir = prepare_out(out_dir);
      std::ostringstream csv;
      write_sweep_csv(rows, csv);
      write_file(dir / "sweep.csv", csv.str());
      nlohmann::json table = nlohmann::json::array();
      for (const auto& r : rows) table.push_back(sweep_row_json(r));
      write_report(dir, {{"command", "sweep"},
                         {"seed", sampler.seed},
                         {"sampler", sampler_json(options.sampler)},
                         {"layout", layout},
                         {"arm_size", scenario.arm_size},
                         {"rows", table}});
      std::cout << csv.str();
      return kExitOk;
    }

    if (*att_cmd) {
      scenario.validate();
      const AttenuationReport r = exact_mixture_or(scenario);
      std::cout << text_summary(scenario, r);
      if (att_out) {
        const fs::path dir = prepare_out(*att_out);
        write_report(dir, {{"command", "attenuation"}, {"result", attenuation_json(scenario, r)}});
      }
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
