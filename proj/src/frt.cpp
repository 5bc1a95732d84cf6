#include "splitplot/frt.hpp"

#include <algorithm>
#include <cmath>

#include "splitplot/error.hpp"
#include "splitplot/parallel.hpp"
#include "splitplot/rng.hpp"

namespace splitplot {

namespace {

constexpr std::uint64_t kFrtDomain = 0x465254;  // "FRT"
constexpr std::size_t kChunk = 2048;

Vector statistics(const ObservedData& data, const std::vector<ContrastMatrix>& contrasts, const AnalysisSpec& spec,
                  CovKind kind) {
  const MeanEstimate m = analyze_means(data, spec, kind);
  Vector t(contrasts.size());
  for (std::size_t k = 0; k < contrasts.size(); ++k) {
    const EffectEstimate e = apply_contrast(contrasts[k], m);
    t[k] = quadform_geninv(e.covariance, e.estimates);
  }
  return t;
}

bool at_least(double t, double t_obs) {
  // Floating-point ties count as exceedances.
  return t >= t_obs - 1e-10 * std::max(1.0, std::abs(t_obs));
}

}  // namespace

std::string_view to_string(FrtMode mode) {
  switch (mode) {
    case FrtMode::automatic: return "auto";
    case FrtMode::exhaustive: return "exhaustive";
    case FrtMode::montecarlo: return "montecarlo";
  }
  return "?";
}

FrtMode parse_frt_mode(std::string_view name) {
  if (name == "auto") return FrtMode::automatic;
  if (name == "exhaustive") return FrtMode::exhaustive;
  if (name == "montecarlo") return FrtMode::montecarlo;
  throw InvalidInput("unknown FRT mode '" + std::string(name) + "'");
}

PotentialOutcomeTable impute_strong_null(const ObservedData& data) {
  const SplitPlotDesign& d = data.design();
  Matrix table(d.num_units(), d.num_treatments());
  for (std::size_t i = 0; i < d.num_units(); ++i)
    for (std::size_t z = 0; z < d.num_treatments(); ++z) table(i, z) = data.outcomes()[i];
  return PotentialOutcomeTable(d, std::move(table));
}

double wald_statistic(const ObservedData& data, const ContrastMatrix& g, const AnalysisSpec& spec, CovKind kind) {
  return statistics(data, {g}, spec, kind)[0];
}

std::vector<FrtResult> frt_many(const ObservedData& data, const std::vector<ContrastMatrix>& contrasts,
                                const AnalysisSpec& spec, const FrtOptions& options) {
  const SplitPlotDesign& d = data.design();
  for (const auto& g : contrasts)
    if (g.g.cols() != d.num_treatments()) throw InvalidInput("contrast width differs from the number of treatments");
  const std::size_t k = contrasts.size();
  const Vector t_obs = statistics(data, contrasts, spec, options.cov);

  const std::uint64_t space = assignment_space_size(d);
  FrtMode mode = options.mode;
  if (mode == FrtMode::automatic) mode = space <= options.exhaustive_limit ? FrtMode::exhaustive : FrtMode::montecarlo;
  if (mode == FrtMode::montecarlo && options.draws == 0) throw InvalidInput("Monte Carlo FRT needs at least one draw");

  // The sharp null fixes every unit's outcome, so re-observing under another
  // assignment only changes the assignment.
  auto reobserve = [&](Assignment x) {
    return ObservedData(d, std::move(x), data.outcomes(), data.covariates(), data.covariate_names());
  };

  const std::size_t workers = worker_count(options.workers);
  std::vector<std::uint64_t> count(k, 0);
  std::uint64_t total = 0;
  auto tally = [&](const std::vector<Vector>& stats) {
    for (const Vector& t : stats)
      for (std::size_t j = 0; j < k; ++j)
        if (at_least(t[j], t_obs[j])) ++count[j];
  };

  if (mode == FrtMode::exhaustive) {
    AssignmentEnumerator it(d, options.cap);
    std::vector<Assignment> batch;
    Assignment x;
    bool more = true;
    while (more) {
      batch.clear();
      while (batch.size() < kChunk && (more = it.next(x))) batch.push_back(x);
      std::vector<Vector> stats(batch.size());
      parallel_for(batch.size(), workers,
                   [&](std::size_t i) { stats[i] = statistics(reobserve(batch[i]), contrasts, spec, options.cov); });
      tally(stats);
      total += batch.size();
    }
  } else {
    for (std::uint64_t start = 0; start < options.draws; start += kChunk) {
      const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, options.draws - start));
      std::vector<Vector> stats(n);
      parallel_for(n, workers, [&](std::size_t i) {
        const Assignment x = randomize(d, derive_seed(options.seed, kFrtDomain, start + i));
        stats[i] = statistics(reobserve(x), contrasts, spec, options.cov);
      });
      tally(stats);
    }
    total = options.draws;
  }

  std::vector<std::string> warnings;
  if (!is_consistent(spec, d))
    warnings.push_back("scheme '" + describe(spec) +
                       "' is inconsistent on a non-uniform design; the test is not valid for the weak null");

  std::vector<FrtResult> out(k);
  for (std::size_t j = 0; j < k; ++j) {
    FrtResult& r = out[j];
    r.statistic = t_obs[j];
    r.mode = mode;
    r.draws = total;
    r.count_ge = count[j];
    r.warnings = warnings;
    if (mode == FrtMode::exhaustive) {
      r.p_value = static_cast<double>(count[j]) / static_cast<double>(total);
    } else {
      r.p_value = static_cast<double>(1 + count[j]) / static_cast<double>(1 + total);
      r.seed = options.seed;
    }
  }
  return out;
}

FrtResult frt(const ObservedData& data, const ContrastMatrix& g, const AnalysisSpec& spec, const FrtOptions& options) {
  return frt_many(data, {g}, spec, options)[0];
}

}  // namespace splitplot
