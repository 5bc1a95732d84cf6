#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "splitplot/analysis.hpp"
#include "splitplot/cli.hpp"
#include "splitplot/contrasts.hpp"
#include "splitplot/design.hpp"
#include "splitplot/error.hpp"
#include "splitplot/estimators.hpp"
#include "splitplot/frt.hpp"
#include "splitplot/montecarlo.hpp"
#include "splitplot/regression.hpp"

namespace py = pybind11;
using namespace splitplot;

namespace {

py::array_t<double> to_numpy(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) v(i, j) = m(i, j);
  return out;
}

py::array_t<double> to_numpy(const Vector& x) {
  py::array_t<double> out(x.size());
  std::copy(x.begin(), x.end(), out.mutable_data());
  return out;
}

Matrix to_matrix(const py::object& obj, std::size_t rows_if_none = 0) {
  if (obj.is_none()) return Matrix(rows_if_none, 0);
  auto a = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(obj);
  if (!a) throw InvalidInput("expected a numeric array");
  if (a.ndim() == 1) {
    Matrix m(static_cast<std::size_t>(a.shape(0)), 1);
    for (py::ssize_t i = 0; i < a.shape(0); ++i) m(i, 0) = a.at(i);
    return m;
  }
  if (a.ndim() != 2) throw InvalidInput("expected a 1-d or 2-d array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  auto v = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i)
    for (py::ssize_t j = 0; j < a.shape(1); ++j) m(i, j) = v(i, j);
  return m;
}

// Same vocabulary as the command-line tool: sm/ht/haj are mean schemes,
// ols/wls/ag are regressions.
AnalysisSpec make_analysis(const ObservedData& data, const std::string& scheme, const std::string& adjust,
                           const std::string& parameterization, const std::optional<std::vector<std::string>>& covariates,
                           bool size_factor) {
  const Adjustment adj = parse_adjustment(adjust);
  if (scheme == "sm" || scheme == "ht" || scheme == "haj") {
    if (adj != Adjustment::none || size_factor || covariates)
      throw InvalidInput("covariate adjustment needs a regression scheme (ols, wls or ag)");
    return parse_mean_scheme(scheme);
  }
  ModelSpec m = make_spec(parse_fitting(scheme), adj, parse_parameterization(parameterization));
  m.size_factor = size_factor;
  if (covariates) {
    const auto& names = data.covariate_names();
    for (const auto& c : *covariates) {
      const auto it = std::find(names.begin(), names.end(), c);
      if (it == names.end()) throw InvalidInput("unknown covariate column '" + c + "'");
      m.covariate_columns.push_back(static_cast<std::size_t>(it - names.begin()));
    }
  }
  m.unit_covariates = !(size_factor && (!covariates || covariates->empty()));
  if (adj != Adjustment::none) validate_spec(m, data);
  return m;
}

CovKind parse_cov(const std::string& name) {
  if (name == "classic") return CovKind::classic;
  if (name == "hc2") return CovKind::hc2;
  throw InvalidInput("unknown covariance '" + name + "' (classic or hc2)");
}

ContrastMatrix contrast_or_standard(const ObservedData& data, const std::optional<ContrastMatrix>& g) {
  if (g) return *g;
  return standard_contrasts(data.design().t_a(), data.design().t_b());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Design-based estimators, regressions and randomization tests for split-plot experiments.";

  auto base = py::register_exception<Error>(m, "SplitPlotError", PyExc_RuntimeError);
  auto invalid = py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<CapExceeded>(m, "CapExceeded", invalid.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<SplitPlotDesign>(m, "Design")
      .def(py::init<std::size_t, std::size_t, std::vector<std::size_t>, std::vector<std::vector<std::size_t>>>(),
           py::arg("t_a"), py::arg("t_b"), py::arg("whole_plot_counts"), py::arg("sub_plot_counts"))
      .def_property_readonly("t_a", &SplitPlotDesign::t_a)
      .def_property_readonly("t_b", &SplitPlotDesign::t_b)
      .def_property_readonly("num_treatments", &SplitPlotDesign::num_treatments)
      .def_property_readonly("num_plots", &SplitPlotDesign::num_plots)
      .def_property_readonly("num_units", &SplitPlotDesign::num_units)
      .def_property_readonly("whole_plot_counts", &SplitPlotDesign::whole_plot_counts)
      .def_property_readonly("sub_plot_counts", &SplitPlotDesign::sub_plot_counts)
      .def_property_readonly("size_factors", [](const SplitPlotDesign& d) { return to_numpy(d.size_factors()); })
      .def_property_readonly("is_uniform", &SplitPlotDesign::is_uniform)
      .def("treatment", &SplitPlotDesign::treatment, py::arg("a"), py::arg("b"))
      .def("levels", &SplitPlotDesign::levels, py::arg("z"))
      .def("p_a", &SplitPlotDesign::p_a, py::arg("a"))
      .def("q_wb", &SplitPlotDesign::q_wb, py::arg("w"), py::arg("b"))
      .def("inclusion_probability", &SplitPlotDesign::inclusion_probability, py::arg("w"), py::arg("z"))
      .def("assignment_space_size", [](const SplitPlotDesign& d) { return assignment_space_size(d); })
      .def(py::self == py::self)
      .def("__repr__", [](const SplitPlotDesign& d) {
        return "Design(t_a=" + std::to_string(d.t_a()) + ", t_b=" + std::to_string(d.t_b()) +
               ", plots=" + std::to_string(d.num_plots()) + ", units=" + std::to_string(d.num_units()) + ")";
      });

  py::class_<Assignment>(m, "Assignment")
      .def(py::init<>())
      .def(py::init([](std::vector<std::size_t> a, std::vector<std::vector<std::size_t>> b) {
             return Assignment{std::move(a), std::move(b)};
           }),
           py::arg("a_levels"), py::arg("b_levels"))
      .def_readwrite("a_levels", &Assignment::a_levels)
      .def_readwrite("b_levels", &Assignment::b_levels)
      .def(py::self == py::self);

  m.def("randomize", &randomize, py::arg("design"), py::arg("seed"),
        "Two-stage complete randomization, reproducible from the seed.");
  m.def("validate_assignment", &validate_assignment, py::arg("design"), py::arg("assignment"));

  py::class_<ObservedData>(m, "ObservedData")
      .def(py::init([](const SplitPlotDesign& d, const Assignment& x, const Vector& y, const py::object& cov,
                       std::vector<std::string> names) {
             return ObservedData(d, x, y, to_matrix(cov, d.num_units()), std::move(names));
           }),
           py::arg("design"), py::arg("assignment"), py::arg("outcomes"), py::arg("covariates") = py::none(),
           py::arg("covariate_names") = std::vector<std::string>{})
      .def_property_readonly("design", &ObservedData::design)
      .def_property_readonly("assignment", &ObservedData::assignment)
      .def_property_readonly("outcomes", [](const ObservedData& d) { return to_numpy(d.outcomes()); })
      .def_property_readonly("covariates", [](const ObservedData& d) { return to_numpy(d.covariates()); })
      .def_property_readonly("covariate_names", &ObservedData::covariate_names)
      .def_property_readonly("unit_treatments", &ObservedData::unit_treatments)
      .def_property_readonly("unit_plots", &ObservedData::unit_plots);

  m.def(
      "read_dataset_csv",
      [](const std::string& text) {
        std::istringstream in(text);
        return cli::read_dataset(in).data;
      },
      py::arg("text"), "Parses a dataset in the command-line tool's CSV format.");
  m.def(
      "load_dataset", [](const std::string& path) { return cli::load_dataset(path).data; }, py::arg("path"));

  py::class_<PotentialOutcomeTable>(m, "PotentialOutcomes")
      .def(py::init([](const SplitPlotDesign& d, const py::object& table) {
             return PotentialOutcomeTable(d, to_matrix(table));
           }),
           py::arg("design"), py::arg("table"))
      .def_property_readonly("design", &PotentialOutcomeTable::design)
      .def_property_readonly("table", [](const PotentialOutcomeTable& p) { return to_numpy(p.table()); })
      .def("mean", &PotentialOutcomeTable::mean, py::arg("z"));

  m.def(
      "observe",
      [](const PotentialOutcomeTable& pot, const Assignment& x, const py::object& cov, std::vector<std::string> names) {
        return observe(pot, x, to_matrix(cov, pot.design().num_units()), std::move(names));
      },
      py::arg("potential_outcomes"), py::arg("assignment"), py::arg("covariates") = py::none(),
      py::arg("covariate_names") = std::vector<std::string>{});

  py::class_<ContrastMatrix>(m, "Contrasts")
      .def(py::init([](const py::object& g, std::vector<std::string> labels) {
             return make_contrast(to_matrix(g), std::move(labels));
           }),
           py::arg("g"), py::arg("labels"))
      .def_property_readonly("g", [](const ContrastMatrix& c) { return to_numpy(c.g); })
      .def_readonly("labels", &ContrastMatrix::labels);
  m.def("standard_contrasts", &standard_contrasts, py::arg("t_a"), py::arg("t_b"),
        py::arg("halve_interaction") = false);
  m.def(
      "select_rows",
      [](const ContrastMatrix& g, std::vector<std::size_t> rows) { return select_rows(g, rows); },
      py::arg("contrasts"), py::arg("rows"));

  py::class_<MeanEstimate>(m, "MeanEstimate")
      .def_property_readonly("scheme", [](const MeanEstimate& e) { return std::string(to_string(e.scheme)); })
      .def_property_readonly("means", [](const MeanEstimate& e) { return to_numpy(e.means); })
      .def_property_readonly("covariance", [](const MeanEstimate& e) { return to_numpy(e.covariance); })
      .def_readonly("sample_sizes", &MeanEstimate::sample_sizes);

  py::class_<EffectEstimate>(m, "EffectEstimate")
      .def_property_readonly("estimates", [](const EffectEstimate& e) { return to_numpy(e.estimates); })
      .def_property_readonly("covariance", [](const EffectEstimate& e) { return to_numpy(e.covariance); })
      .def_property_readonly("standard_errors", [](const EffectEstimate& e) { return to_numpy(e.standard_errors()); })
      .def_readonly("labels", &EffectEstimate::labels);

  m.def(
      "estimate_means",
      [](const ObservedData& data, const std::string& scheme) { return estimate_means(data, parse_mean_scheme(scheme)); },
      py::arg("data"), py::arg("scheme") = "ht", "Treatment means by sm, ht or haj with their covariance estimate.");

  m.def(
      "estimate_effects",
      [](const ObservedData& data, const std::string& scheme, const std::string& adjust,
         const std::string& parameterization, const std::optional<std::vector<std::string>>& covariates,
         bool size_factor, const std::string& cov, const std::optional<ContrastMatrix>& contrasts) {
        const AnalysisSpec spec = make_analysis(data, scheme, adjust, parameterization, covariates, size_factor);
        return analyze(data, spec, contrast_or_standard(data, contrasts), parse_cov(cov));
      },
      py::arg("data"), py::arg("scheme") = "wls", py::arg("adjust") = "none",
      py::arg("parameterization") = "indicator", py::arg("covariates") = py::none(), py::arg("size_factor") = false,
      py::arg("cov") = "classic", py::arg("contrasts") = py::none(),
      "Factorial effects under a mean scheme (sm, ht, haj) or regression (ols, wls, ag).");

  py::class_<RegressionFit>(m, "RegressionFit")
      .def_property_readonly("coefficients", [](const RegressionFit& f) { return to_numpy(f.coefficients); })
      .def_readonly("labels", &RegressionFit::labels)
      .def_property_readonly("cov_classic", [](const RegressionFit& f) { return to_numpy(f.cov_classic); })
      .def_property_readonly("cov_hc2", [](const RegressionFit& f) { return to_numpy(f.cov_hc2); })
      .def_property_readonly("residuals", [](const RegressionFit& f) { return to_numpy(f.residuals); })
      .def_readonly("rank", &RegressionFit::rank)
      .def_readonly("dropped_columns", &RegressionFit::dropped_columns)
      .def_readonly("num_treatment_terms", &RegressionFit::num_treatment_terms)
      .def_readonly("warnings", &RegressionFit::warnings)
      .def(
          "means", [](const RegressionFit& f, const std::string& cov) { return coefficients_to_means(f, parse_cov(cov)); },
          py::arg("cov") = "classic")
      .def(
          "effects",
          [](const RegressionFit& f, const ContrastMatrix& g, const std::string& cov) {
            return coefficients_to_effects(f, g, parse_cov(cov));
          },
          py::arg("contrasts"), py::arg("cov") = "classic");

  m.def(
      "fit",
      [](const ObservedData& data, const std::string& fitting, const std::string& adjust,
         const std::string& parameterization, const std::optional<std::vector<std::string>>& covariates,
         bool size_factor, bool hc2) {
        const AnalysisSpec spec = make_analysis(data, fitting, adjust, parameterization, covariates, size_factor);
        const auto* ms = std::get_if<ModelSpec>(&spec);
        if (!ms) throw InvalidInput("fit needs a regression scheme (ols, wls or ag)");
        return fit(data, *ms, FitOptions{.hc2 = hc2});
      },
      py::arg("data"), py::arg("fitting") = "wls", py::arg("adjust") = "none",
      py::arg("parameterization") = "indicator", py::arg("covariates") = py::none(), py::arg("size_factor") = false,
      py::arg("hc2") = true, "Least-squares fit with cluster-robust covariances.");

  py::class_<FrtResult>(m, "FrtResult")
      .def_readonly("statistic", &FrtResult::statistic)
      .def_readonly("p_value", &FrtResult::p_value)
      .def_property_readonly("mode", [](const FrtResult& r) { return std::string(to_string(r.mode)); })
      .def_readonly("draws", &FrtResult::draws)
      .def_readonly("count_ge", &FrtResult::count_ge)
      .def_readonly("seed", &FrtResult::seed)
      .def_readonly("warnings", &FrtResult::warnings);

  m.def(
      "frt",
      [](const ObservedData& data, const std::string& scheme, const std::string& adjust,
         const std::string& parameterization, const std::optional<std::vector<std::string>>& covariates,
         bool size_factor, const std::string& cov, const std::optional<ContrastMatrix>& contrasts,
         const std::string& mode, std::uint64_t draws, std::uint64_t seed, std::uint64_t cap, std::size_t workers) {
        const AnalysisSpec spec = make_analysis(data, scheme, adjust, parameterization, covariates, size_factor);
        FrtOptions o;
        o.mode = parse_frt_mode(mode);
        o.draws = draws;
        o.seed = seed;
        o.cap = cap;
        o.cov = parse_cov(cov);
        o.workers = workers;
        py::gil_scoped_release nogil;
        return frt(data, contrast_or_standard(data, contrasts), spec, o);
      },
      py::arg("data"), py::arg("scheme") = "wls", py::arg("adjust") = "none",
      py::arg("parameterization") = "indicator", py::arg("covariates") = py::none(), py::arg("size_factor") = false,
      py::arg("cov") = "classic", py::arg("contrasts") = py::none(), py::arg("mode") = "auto",
      py::arg("draws") = 4999, py::arg("seed") = 0, py::arg("cap") = 1'000'000, py::arg("workers") = 0,
      "Studentized randomization test of the sharp null for the given contrasts (all standard effects by default).");

  m.def("true_cov_ht", [](const PotentialOutcomeTable& p) { return to_numpy(true_cov_ht(p)); },
        py::arg("potential_outcomes"));
  m.def("vhat_ht_bias", [](const PotentialOutcomeTable& p) { return to_numpy(vhat_ht_bias(p)); },
        py::arg("potential_outcomes"));
  m.def("hajek_ht_asymptotic_gap", [](const PotentialOutcomeTable& p) { return to_numpy(hajek_ht_asymptotic_gap(p)); },
        py::arg("potential_outcomes"));

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("num_plots", &SimConfig::num_plots)
      .def_readwrite("treated_fraction", &SimConfig::treated_fraction)
      .def_readwrite("min_count", &SimConfig::min_count)
      .def_readwrite("covariate_mean", &SimConfig::covariate_mean)
      .def_readwrite("covariate_variance", &SimConfig::covariate_variance)
      .def_readwrite("within_covariate_variance", &SimConfig::within_covariate_variance)
      .def_readwrite("theta_variance", &SimConfig::theta_variance)
      .def_readwrite("epsilon_halfwidth", &SimConfig::epsilon_halfwidth)
      .def_readwrite("replications", &SimConfig::replications)
      .def_readwrite("seed", &SimConfig::seed)
      .def_readwrite("z_critical", &SimConfig::z_critical)
      .def_readwrite("workers", &SimConfig::workers)
      .def_property(
          "size_poisson_mean", [](const SimConfig& c) { return std::vector<double>(c.size_poisson_mean.begin(), c.size_poisson_mean.end()); },
          [](SimConfig& c, const std::vector<double>& v) {
            if (v.size() != 2) throw InvalidInput("size_poisson_mean needs two values");
            c.size_poisson_mean = {v[0], v[1]};
          })
      .def_static(
          "from_json", [](const std::string& text) { return cli::parse_sim_config_json(text); }, py::arg("text"))
      .def("validate", &SimConfig::validate);

  py::class_<SimRow>(m, "SimRow")
      .def_readonly("scheme", &SimRow::scheme)
      .def_readonly("effect", &SimRow::effect)
      .def_readonly("truth", &SimRow::truth)
      .def_readonly("bias", &SimRow::bias)
      .def_readonly("sd", &SimRow::sd)
      .def_readonly("ese", &SimRow::ese)
      .def_readonly("coverage", &SimRow::coverage)
      .def_readonly("failures", &SimRow::failures);

  py::class_<SimSummary>(m, "SimSummary")
      .def_readonly("rows", &SimSummary::rows)
      .def_property_readonly("truth", [](const SimSummary& s) { return to_numpy(s.truth); })
      .def_readonly("replications", &SimSummary::replications)
      .def("row", &SimSummary::row, py::arg("scheme"), py::arg("effect"), py::return_value_policy::copy)
      .def("to_csv", [](const SimSummary& s) {
        std::ostringstream out;
        cli::write_sim_summary_csv(out, s);
        return out.str();
      });

  m.def(
      "run_simulation",
      [](const SimConfig& c) {
        py::gil_scoped_release nogil;
        return run_simulation(c);
      },
      py::arg("config") = SimConfig{}, "Repeated-randomization study over the thirteen regression schemes.");
  m.def("simulation_schemes", []() {
    std::vector<std::string> names;
    for (const auto& s : simulation_schemes()) names.push_back(s.name);
    return names;
  });
}
