#pragma once

// Fisher randomization tests of the sharp null Y_ws(z) = Y_ws for all z,
// studentized by the scheme's own covariance estimate.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "splitplot/analysis.hpp"
#include "splitplot/contrasts.hpp"
#include "splitplot/design.hpp"

namespace splitplot {

enum class FrtMode { automatic, exhaustive, montecarlo };

std::string_view to_string(FrtMode mode);
FrtMode parse_frt_mode(std::string_view name);

struct FrtOptions {
  FrtMode mode = FrtMode::automatic;
  std::uint64_t draws = 4999;
  std::uint64_t seed = 0;
  std::uint64_t cap = 1'000'000;               // hard limit for exhaustive mode
  std::uint64_t exhaustive_limit = 100'000;    // automatic mode switches to Monte Carlo above this
  CovKind cov = CovKind::classic;
  std::size_t workers = 0;                     // 0 = all available
};

struct FrtResult {
  double statistic = 0.0;  // observed t²
  double p_value = 1.0;
  FrtMode mode = FrtMode::exhaustive;
  std::uint64_t draws = 0;  // |Z| or R
  std::uint64_t count_ge = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> warnings;
};

/// Potential outcomes under the sharp null: every column equals the observed outcome.
PotentialOutcomeTable impute_strong_null(const ObservedData& data);

/// (Gm)ᵀ (G V Gᵀ)⁺ (Gm) for the scheme's means m and covariance V.
double wald_statistic(const ObservedData& data, const ContrastMatrix& g, const AnalysisSpec& spec,
                      CovKind kind = CovKind::classic);

/// Several tests sharing one reference distribution of assignments.
std::vector<FrtResult> frt_many(const ObservedData& data, const std::vector<ContrastMatrix>& contrasts,
                                const AnalysisSpec& spec, const FrtOptions& options = {});

FrtResult frt(const ObservedData& data, const ContrastMatrix& g, const AnalysisSpec& spec,
              const FrtOptions& options = {});

}  // namespace splitplot
