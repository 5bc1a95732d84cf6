#pragma once

// Repeated-randomization study on a fixed synthetic 2×2 split-plot population:
// bias, true sd, mean cluster-robust se and normal-interval coverage for the
// thirteen least-squares schemes.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "splitplot/design.hpp"
#include "splitplot/regression.hpp"

namespace splitplot {

/// Y(z) = intercept[z] + theta[z]·θ_w + x2[z]·x_ws² + ε_ws, z in (00, 01, 10, 11).
struct OutcomeModel {
  std::array<double, 4> intercept{0.5, 1.0, 1.0, 2.0};
  std::array<double, 4> theta{1.0, -0.5, 0.5, 1.0};
  std::array<double, 4> x2{2.0, 1.0, -1.0, 2.0};
};

struct SimConfig {
  std::size_t num_plots = 300;
  double treated_fraction = 0.3;  // share of whole-plots at A = 1
  std::array<double, 2> size_poisson_mean{5.0, 3.0};  // M_wb = max(min_count, Poisson) for b = 0, 1
  std::size_t min_count = 2;
  double covariate_mean = 0.2;
  double covariate_variance = 0.5;
  double within_covariate_variance = 0.0;  // > 0 lets x_ws vary inside whole-plots
  double theta_variance = 0.2;             // θ_w ~ N(2 M_w / M_max, theta_variance)
  double epsilon_halfwidth = 1.0;          // ε_ws ~ U(−h, h)
  OutcomeModel outcome;
  std::size_t replications = 2000;
  std::uint64_t seed = 20210401;
  double z_critical = 1.959963984540054;  // 95% two-sided
  std::size_t workers = 0;

  /// Throws InvalidInput for degenerate settings.
  void validate() const;
};

struct Population {
  SplitPlotDesign design;
  PotentialOutcomeTable outcomes;
  Matrix covariates;  // N × 1, x_ws
  Vector theta;       // θ_w
  Vector plot_covariate;  // x_w
};

Population generate_population(const SimConfig& config, std::uint64_t seed);

struct SimScheme {
  std::string name;
  ModelSpec spec;
};

/// ols, ols.x.F, ols.x.L, wls, wls.x.F, wls.x.L, ag, ag.x.F, ag.x.L,
/// ag.m.F, ag.m.L, ag.xm.F, ag.xm.L, all with factor terms.
std::vector<SimScheme> simulation_schemes();

struct SimRow {
  std::string scheme;
  std::string effect;
  double truth = 0.0;
  double bias = 0.0;
  double sd = 0.0;   // NaN when fewer than two replications succeeded
  double ese = 0.0;
  double coverage = 0.0;
  std::size_t failures = 0;
};

struct SimSummary {
  std::vector<SimRow> rows;  // scheme-major, effects A, B, AB
  Vector truth;              // τ_A, τ_B, τ_AB
  std::size_t replications = 0;
  /// estimates[scheme][effect][replication], NaN where a fit failed.
  std::vector<std::array<Vector, 3>> estimates;
  std::vector<std::array<Vector, 3>> standard_errors;

  const SimRow& row(const std::string& scheme, const std::string& effect) const;
};

SimSummary run_simulation(const SimConfig& config);

}  // namespace splitplot
