#include <algorithm>
#include <cmath>
#include <optional>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "splitplot/analysis.hpp"
#include "splitplot/cli.hpp"
#include "splitplot/contrasts.hpp"
#include "splitplot/error.hpp"
#include "splitplot/frt.hpp"
#include "splitplot/montecarlo.hpp"

namespace splitplot::cli {

namespace {

struct AnalysisFlags {
  std::string dataset;
  std::string scheme = "wls";
  std::string adjust = "none";
  std::vector<std::string> covariates;
  bool size_factor = false;
  std::string parameterization = "factor";
  std::string contrasts = "standard";
  bool hc2 = false;
  std::string design;
};

struct FrtFlags {
  std::string mode = "auto";
  std::uint64_t draws = 4999;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

void add_analysis_flags(CLI::App* cmd, AnalysisFlags& f) {
  cmd->add_option("dataset", f.dataset, "Dataset CSV (whole_plot, a_level, b_level, outcome, covariates...)")->required();
  cmd->add_option("--scheme", f.scheme, "sm, ht, haj, ols, wls or ag")->check(CLI::IsMember({"sm", "ht", "haj", "ols", "wls", "ag"}));
  cmd->add_option("--adjust", f.adjust, "none, additive or interacted")->check(CLI::IsMember({"none", "additive", "interacted"}));
  cmd->add_option("--covariates", f.covariates, "Covariate columns to adjust for (default: all)")->delimiter(',');
  cmd->add_flag("--size-factor", f.size_factor, "Adjust for the whole-plot size factor (ag only)");
  cmd->add_option("--parameterization", f.parameterization, "indicator or factor")
      ->check(CLI::IsMember({"indicator", "factor"}));
  cmd->add_option("--contrasts", f.contrasts, "standard, or standard-half to halve interactions")
      ->check(CLI::IsMember({"standard", "standard-half"}));
  cmd->add_flag("--hc2", f.hc2, "Use the HC2-corrected cluster-robust covariance (regression schemes)");
  cmd->add_option("--design", f.design, "Design JSON the dataset must match");
}

struct Prepared {
  Dataset dataset;
  AnalysisSpec spec;
  ContrastMatrix g;
  CovKind kind;
};

Prepared prepare(const AnalysisFlags& f) {
  Dataset ds = load_dataset(f.dataset);
  if (!f.design.empty() && !(load_design(f.design) == ds.data.design()))
    throw InvalidInput("dataset counts do not match the design in '" + f.design + "'");
  const bool regression = f.scheme == "ols" || f.scheme == "wls" || f.scheme == "ag";
  const Adjustment adj = parse_adjustment(f.adjust);
  AnalysisSpec spec;
  if (!regression) {
    if (adj != Adjustment::none || f.size_factor || !f.covariates.empty())
      throw InvalidInput("covariate adjustment needs a regression scheme (ols, wls or ag)");
    if (f.hc2) throw InvalidInput("--hc2 applies to regression schemes only");
    spec = parse_mean_scheme(f.scheme);
  } else {
    if (adj == Adjustment::none && (f.size_factor || !f.covariates.empty()))
      throw InvalidInput("--covariates and --size-factor need --adjust additive or interacted");
    ModelSpec m = make_spec(parse_fitting(f.scheme), adj, parse_parameterization(f.parameterization));
    m.size_factor = f.size_factor;
    const auto& names = ds.data.covariate_names();
    for (const auto& c : f.covariates) {
      const auto it = std::find(names.begin(), names.end(), c);
      if (it == names.end()) throw InvalidInput("unknown covariate column '" + c + "'");
      m.covariate_columns.push_back(static_cast<std::size_t>(it - names.begin()));
    }
    // --size-factor without --covariates adjusts for the size factor alone.
    m.unit_covariates = !(f.size_factor && f.covariates.empty());
    validate_spec(m, ds.data);
    spec = m;
  }
  const auto& d = ds.data.design();
  ContrastMatrix g = standard_contrasts(d.t_a(), d.t_b(), f.contrasts == "standard-half");
  return Prepared{std::move(ds), spec, std::move(g), f.hc2 ? CovKind::hc2 : CovKind::classic};
}

double normal_p(double est, double se) {
  if (!(se > 0.0)) return std::nan("");
  return std::erfc(std::abs(est / se) / std::sqrt(2.0));
}

void write_result_table(std::ostream& out, const EffectEstimate& e, const std::vector<double>& p_frt, double p_joint) {
  out << "effect,est,se,p.normal,p.frt\n";
  const Vector se = e.standard_errors();
  for (std::size_t k = 0; k < e.estimates.size(); ++k)
    out << e.labels[k] << ',' << format_number(e.estimates[k]) << ',' << format_number(se[k]) << ','
        << format_number(normal_p(e.estimates[k], se[k])) << ','
        << format_number(p_frt.empty() ? std::nan("") : p_frt[k]) << '\n';
  if (!std::isnan(p_joint)) out << "joint,NA,NA,NA," << format_number(p_joint) << '\n';
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw InvalidInput("cannot write '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

void warn_all(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design-based analysis of split-plot experiments"};
  app.name("splitplot");
  app.require_subcommand(1);

  std::string design_path, out_path;
  std::uint64_t seed = 0;
  auto* randomize_cmd = app.add_subcommand("randomize", "Draw a split-plot assignment");
  randomize_cmd->add_option("--design", design_path, "Design JSON")->required();
  randomize_cmd->add_option("--seed", seed, "Random seed")->required();
  randomize_cmd->add_option("--out", out_path, "Output CSV (default: stdout)");

  AnalysisFlags est_flags;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate factorial effects");
  add_analysis_flags(estimate_cmd, est_flags);
  estimate_cmd->add_option("--out", out_path, "Output CSV (default: stdout)");

  AnalysisFlags frt_flags;
  FrtFlags frt_opts;
  auto* frt_cmd = app.add_subcommand("frt", "Fisher randomization tests of the sharp null");
  add_analysis_flags(frt_cmd, frt_flags);
  frt_cmd->add_option("--mode", frt_opts.mode, "auto, exhaustive or montecarlo")
      ->check(CLI::IsMember({"auto", "exhaustive", "montecarlo"}));
  frt_cmd->add_option("--draws", frt_opts.draws, "Monte Carlo draws");
  frt_cmd->add_option("--seed", frt_opts.seed, "Seed for Monte Carlo draws");
  frt_cmd->add_option("--workers", frt_opts.workers, "Worker threads (0 = all)");
  frt_cmd->add_option("--out", out_path, "Output CSV (default: stdout)");

  std::string config_path;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::size_t> sim_reps, sim_plots, sim_workers;
  std::optional<double> sim_within;
  auto* simulate_cmd = app.add_subcommand("simulate", "Repeated-randomization study of the regression schemes");
  simulate_cmd->add_option("--config", config_path, "Simulation JSON");
  simulate_cmd->add_option("--seed", sim_seed, "Seed");
  simulate_cmd->add_option("--replications", sim_reps, "Replications");
  simulate_cmd->add_option("--plots", sim_plots, "Number of whole-plots");
  simulate_cmd->add_option("--within-noise", sim_within, "Variance of within-plot covariate noise");
  simulate_cmd->add_option("--workers", sim_workers, "Worker threads (0 = all)");
  simulate_cmd->add_option("--out", out_path, "Output CSV (default: stdout)");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      return 2;
    }

    if (randomize_cmd->parsed()) {
      const SplitPlotDesign d = load_design(design_path);
      const Assignment x = randomize(d, seed);
      Output o(out_path, out);
      write_assignment_csv(o.get(), d, x);
    } else if (estimate_cmd->parsed()) {
      const Prepared p = prepare(est_flags);
      if (!is_consistent(p.spec, p.dataset.data.design()))
        err << "warning: scheme '" << describe(p.spec) << "' is inconsistent on a non-uniform design\n";
      const EffectEstimate e = analyze(p.dataset.data, p.spec, p.g, p.kind);
      Output o(out_path, out);
      write_result_table(o.get(), e, {}, std::nan(""));
    } else if (frt_cmd->parsed()) {
      const Prepared p = prepare(frt_flags);
      FrtOptions opts;
      opts.mode = parse_frt_mode(frt_opts.mode);
      opts.draws = frt_opts.draws;
      opts.seed = frt_opts.seed;
      opts.cov = p.kind;
      opts.workers = frt_opts.workers;
      std::vector<ContrastMatrix> tests{p.g};
      for (std::size_t k = 0; k < p.g.g.rows(); ++k) {
        const std::size_t rows[] = {k};
        tests.push_back(select_rows(p.g, rows));
      }
      const auto results = frt_many(p.dataset.data, tests, p.spec, opts);
      warn_all(err, results.front().warnings);
      const EffectEstimate e = analyze(p.dataset.data, p.spec, p.g, p.kind);
      std::vector<double> per_effect;
      for (std::size_t k = 1; k < results.size(); ++k) per_effect.push_back(results[k].p_value);
      Output o(out_path, out);
      write_result_table(o.get(), e, per_effect, results.front().p_value);
    } else if (simulate_cmd->parsed()) {
      SimConfig c;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw InvalidInput("cannot open '" + config_path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        c = parse_sim_config_json(ss.str());
      }
      if (sim_seed) c.seed = *sim_seed;
      if (sim_reps) c.replications = *sim_reps;
      if (sim_plots) c.num_plots = *sim_plots;
      if (sim_within) c.within_covariate_variance = *sim_within;
      if (sim_workers) c.workers = *sim_workers;
      const SimSummary s = run_simulation(c);
      Output o(out_path, out);
      write_sim_summary_csv(o.get(), s);
    }
    return 0;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace splitplot::cli
