#include "splitplot/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "splitplot/contrasts.hpp"
#include "splitplot/error.hpp"
#include "splitplot/parallel.hpp"
#include "splitplot/rng.hpp"

namespace splitplot {

namespace {

constexpr std::uint64_t kPopulationDomain = 0x504f50;  // "POP"
constexpr std::uint64_t kReplicationDomain = 0x524550;  // "REP"

ModelSpec scheme_spec(Fitting f, Adjustment adj, bool unit_cov, bool size) {
  ModelSpec s = make_spec(f, adj, Parameterization::factor);
  s.unit_covariates = unit_cov;
  s.size_factor = size;
  return s;
}

}  // namespace

void SimConfig::validate() const {
  if (num_plots < 4) throw InvalidInput("simulation: need at least 4 whole-plots");
  if (!(treated_fraction > 0.0 && treated_fraction < 1.0)) throw InvalidInput("simulation: treated fraction must be in (0, 1)");
  const auto w1 = static_cast<std::size_t>(std::llround(treated_fraction * static_cast<double>(num_plots)));
  if (w1 < 2 || num_plots - w1 < 2) throw InvalidInput("simulation: each whole-plot level needs at least 2 plots");
  if (min_count < 2) throw InvalidInput("simulation: sub-plot counts must be at least 2");
  for (double m : size_poisson_mean)
    if (!(m >= 0.0) || !std::isfinite(m)) throw InvalidInput("simulation: Poisson means must be nonnegative");
  if (!(covariate_variance >= 0.0) || !(within_covariate_variance >= 0.0) || !(theta_variance >= 0.0) ||
      !(epsilon_halfwidth >= 0.0))
    throw InvalidInput("simulation: variances and widths must be nonnegative");
  if (replications < 1) throw InvalidInput("simulation: need at least one replication");
  if (!(z_critical > 0.0)) throw InvalidInput("simulation: critical value must be positive");
}

Population generate_population(const SimConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t np = config.num_plots;
  const auto w1 = static_cast<std::size_t>(std::llround(config.treated_fraction * static_cast<double>(np)));
  Rng rng(derive_seed(seed, kPopulationDomain, 0));

  std::vector<std::vector<std::size_t>> counts(np, std::vector<std::size_t>(2));
  for (std::size_t w = 0; w < np; ++w)
    for (std::size_t b = 0; b < 2; ++b)
      counts[w][b] = std::max<std::size_t>(config.min_count, rng.poisson(config.size_poisson_mean[b]));
  SplitPlotDesign design(2, 2, {np - w1, w1}, counts);

  std::size_t m_max = 0;
  for (std::size_t w = 0; w < np; ++w) m_max = std::max(m_max, design.plot_size(w));

  Vector xw(np);
  Vector theta(np);
  for (std::size_t w = 0; w < np; ++w) xw[w] = rng.normal(config.covariate_mean, std::sqrt(config.covariate_variance));
  for (std::size_t w = 0; w < np; ++w)
    theta[w] = rng.normal(2.0 * static_cast<double>(design.plot_size(w)) / static_cast<double>(m_max),
                          std::sqrt(config.theta_variance));

  const std::size_t n = design.num_units();
  Matrix x(n, 1);
  Matrix table(n, 4);
  const OutcomeModel& om = config.outcome;
  for (std::size_t w = 0; w < np; ++w)
    for (std::size_t s = 0; s < design.plot_size(w); ++s) {
      const std::size_t i = design.unit_offset(w) + s;
      const double eps = config.epsilon_halfwidth > 0.0 ? rng.uniform(-config.epsilon_halfwidth, config.epsilon_halfwidth) : 0.0;
      double xi = xw[w];
      if (config.within_covariate_variance > 0.0) xi += rng.normal(0.0, std::sqrt(config.within_covariate_variance));
      x(i, 0) = xi;
      for (std::size_t z = 0; z < 4; ++z) table(i, z) = om.intercept[z] + om.theta[z] * theta[w] + om.x2[z] * xi * xi + eps;
    }
  PotentialOutcomeTable pot(design, std::move(table));
  return Population{std::move(design), std::move(pot), std::move(x), std::move(theta), std::move(xw)};
}

std::vector<SimScheme> simulation_schemes() {
  using A = Adjustment;
  std::vector<SimScheme> out;
  for (Fitting f : {Fitting::ols, Fitting::wls, Fitting::ag}) {
    const std::string base(to_string(f));
    out.push_back({base, scheme_spec(f, A::none, false, false)});
    out.push_back({base + ".x.F", scheme_spec(f, A::additive, true, false)});
    out.push_back({base + ".x.L", scheme_spec(f, A::interacted, true, false)});
  }
  out.push_back({"ag.m.F", scheme_spec(Fitting::ag, A::additive, false, true)});
  out.push_back({"ag.m.L", scheme_spec(Fitting::ag, A::interacted, false, true)});
  out.push_back({"ag.xm.F", scheme_spec(Fitting::ag, A::additive, true, true)});
  out.push_back({"ag.xm.L", scheme_spec(Fitting::ag, A::interacted, true, true)});
  return out;
}

const SimRow& SimSummary::row(const std::string& scheme, const std::string& effect) const {
  for (const auto& r : rows)
    if (r.scheme == scheme && r.effect == effect) return r;
  throw InvalidInput("no simulation row for " + scheme + "/" + effect);
}

SimSummary run_simulation(const SimConfig& config) {
  config.validate();
  const Population pop = generate_population(config, config.seed);
  const ContrastMatrix g = standard_contrasts(2, 2);
  const std::vector<SimScheme> schemes = simulation_schemes();
  const std::size_t ns = schemes.size();
  const std::size_t reps = config.replications;

  SimSummary out;
  out.replications = reps;
  Vector ybar(4);
  for (std::size_t z = 0; z < 4; ++z) ybar[z] = pop.outcomes.mean(z);
  out.truth = g.g * ybar;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.estimates.assign(ns, {Vector(reps, nan), Vector(reps, nan), Vector(reps, nan)});
  out.standard_errors = out.estimates;

  const FitOptions opts{.hc2 = false, .hc0 = false};
  parallel_for(reps, worker_count(config.workers), [&](std::size_t r) {
    const Assignment x = randomize(pop.design, derive_seed(config.seed, kReplicationDomain, r));
    const ObservedData data = observe(pop.outcomes, x, pop.covariates, {"x"});
    for (std::size_t k = 0; k < ns; ++k) {
      try {
        const EffectEstimate e = coefficients_to_effects(fit(data, schemes[k].spec, opts), g);
        const Vector se = e.standard_errors();
        for (std::size_t j = 0; j < 3; ++j) {
          out.estimates[k][j][r] = e.estimates[j];
          out.standard_errors[k][j][r] = se[j];
        }
      } catch (const Error&) {
        // recorded as NaN and counted below
      }
    }
  });

  // Serial reduction in replication order, so results do not depend on the worker count.
  for (std::size_t k = 0; k < ns; ++k)
    for (std::size_t j = 0; j < 3; ++j) {
      SimRow row;
      row.scheme = schemes[k].name;
      row.effect = g.labels[j];
      row.truth = out.truth[j];
      double sum = 0.0, sum_se = 0.0;
      std::size_t ok = 0, covered = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const double est = out.estimates[k][j][r];
        const double se = out.standard_errors[k][j][r];
        if (!std::isfinite(est) || !std::isfinite(se)) {
          ++row.failures;
          continue;
        }
        ++ok;
        sum += est;
        sum_se += se;
        if (std::abs(est - row.truth) <= config.z_critical * se) ++covered;
      }
      if (ok == 0) {
        row.bias = row.sd = row.ese = row.coverage = nan;
      } else {
        const double mean = sum / static_cast<double>(ok);
        double ss = 0.0;
        for (std::size_t r = 0; r < reps; ++r) {
          const double est = out.estimates[k][j][r];
          if (std::isfinite(est) && std::isfinite(out.standard_errors[k][j][r])) ss += (est - mean) * (est - mean);
        }
        row.bias = mean - row.truth;
        row.sd = ok > 1 ? std::sqrt(ss / static_cast<double>(ok - 1)) : nan;
        row.ese = sum_se / static_cast<double>(ok);
        row.coverage = static_cast<double>(covered) / static_cast<double>(ok);
      }
      out.rows.push_back(row);
    }
  return out;
}

}  // namespace splitplot
