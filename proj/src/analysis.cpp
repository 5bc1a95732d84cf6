#include "splitplot/analysis.hpp"

#include "splitplot/error.hpp"

namespace splitplot {

std::string describe(const AnalysisSpec& spec) {
  if (const auto* m = std::get_if<MeanScheme>(&spec)) return std::string(to_string(*m));
  const auto& s = std::get<ModelSpec>(spec);
  std::string out(to_string(s.fitting));
  if (s.adjustment != Adjustment::none) {
    out += s.adjustment == Adjustment::additive ? "+additive" : "+interacted";
    if (s.unit_covariates) out += "(x)";
    if (s.size_factor) out += "(size)";
  }
  out += s.parameterization == Parameterization::factor ? "/factor" : "/indicator";
  return out;
}

bool is_consistent(const AnalysisSpec& spec, const SplitPlotDesign& design) {
  if (design.is_uniform()) return true;
  if (const auto* m = std::get_if<MeanScheme>(&spec)) return *m != MeanScheme::sm;
  return std::get<ModelSpec>(spec).fitting != Fitting::ols;
}

MeanEstimate analyze_means(const ObservedData& data, const AnalysisSpec& spec, CovKind kind) {
  if (const auto* m = std::get_if<MeanScheme>(&spec)) {
    if (kind == CovKind::hc2) throw InvalidInput("HC2 applies to regression schemes only");
    return estimate_means(data, *m);
  }
  FitOptions opts;
  opts.hc2 = kind == CovKind::hc2;
  return coefficients_to_means(fit(data, std::get<ModelSpec>(spec), opts), kind);
}

EffectEstimate analyze(const ObservedData& data, const AnalysisSpec& spec, const ContrastMatrix& g, CovKind kind) {
  return apply_contrast(g, analyze_means(data, spec, kind));
}

}  // namespace splitplot
