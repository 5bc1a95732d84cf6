#pragma once

// One entry point over the design-based mean estimators and the regression
// fits, so testing and reporting code can treat them alike.

#include <string>
#include <variant>

#include "splitplot/contrasts.hpp"
#include "splitplot/design.hpp"
#include "splitplot/estimators.hpp"
#include "splitplot/regression.hpp"

namespace splitplot {

using AnalysisSpec = std::variant<MeanScheme, ModelSpec>;

std::string describe(const AnalysisSpec& spec);

/// False for the sample-mean and ols schemes on non-uniform designs, where
/// they are inconsistent for the population means.
bool is_consistent(const AnalysisSpec& spec, const SplitPlotDesign& design);

/// Treatment means and their covariance. HC2 is only defined for regressions.
MeanEstimate analyze_means(const ObservedData& data, const AnalysisSpec& spec, CovKind kind = CovKind::classic);

EffectEstimate analyze(const ObservedData& data, const AnalysisSpec& spec, const ContrastMatrix& g,
                       CovKind kind = CovKind::classic);

}  // namespace splitplot
