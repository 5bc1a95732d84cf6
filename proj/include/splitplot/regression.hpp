#pragma once

// Least-squares views of the design-based estimators. Three fitting schemes:
// unit-level OLS, unit-level inverse-probability WLS, and OLS on whole-plot
// aggregates (one row per plot and sub-plot level, outcome α_w Ŷ_w(A_w, b)).
// Treatment terms are either one-hot indicators or centered factor terms;
// covariates enter additively or interacted with the treatment terms.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "splitplot/contrasts.hpp"
#include "splitplot/design.hpp"
#include "splitplot/estimators.hpp"
#include "splitplot/linalg.hpp"

namespace splitplot {

enum class Fitting { ols, wls, ag };
enum class Adjustment { none, additive, interacted };
enum class Parameterization { indicator, factor };
enum class Level { unit, aggregate };
enum class CovKind { classic, hc2 };

std::string_view to_string(Fitting f);
std::string_view to_string(Adjustment a);
std::string_view to_string(Parameterization p);
Fitting parse_fitting(std::string_view name);
Adjustment parse_adjustment(std::string_view name);
Parameterization parse_parameterization(std::string_view name);

/// The mean scheme a fitting scheme reproduces: ols→sm, wls→haj, ag→ht.
MeanScheme matching_mean_scheme(Fitting f);

struct ModelSpec {
  Fitting fitting = Fitting::wls;
  Adjustment adjustment = Adjustment::none;
  Parameterization parameterization = Parameterization::indicator;
  /// Use the data's covariates (all of them unless covariate_columns is set).
  bool unit_covariates = true;
  std::vector<std::size_t> covariate_columns;
  /// Add α_w − 1 as a covariate; aggregate fits only.
  bool size_factor = false;

  Level level() const noexcept { return fitting == Fitting::ag ? Level::aggregate : Level::unit; }
};

ModelSpec make_spec(Fitting fitting, Adjustment adjustment = Adjustment::none,
                    Parameterization parameterization = Parameterization::indicator);

/// Throws InvalidInput for inconsistent specs (size factor on a unit fit,
/// out-of-range covariate columns, adjustment without covariates).
void validate_spec(const ModelSpec& spec, const ObservedData& data);

struct ModelMatrix {
  Matrix x;
  Vector y;
  Vector weights;
  std::vector<std::size_t> clusters;    // whole-plot per row
  std::vector<std::size_t> treatments;  // z per row
  std::vector<std::string> labels;
  /// Treatment terms occupy the first num_treatment_terms columns.
  std::size_t num_treatment_terms = 0;
  /// Row z maps the treatment coefficients to the mean of treatment z at
  /// covariates equal to their (zero) centre.
  Matrix treatment_basis;
  Parameterization parameterization = Parameterization::indicator;
  Fitting fitting = Fitting::wls;
};

ModelMatrix build_model(const ObservedData& data, const ModelSpec& spec);

struct FitOptions {
  bool hc2 = true;
  bool hc0 = false;  // non-clustered heteroskedasticity-robust covariance
};

struct RegressionFit {
  ModelSpec spec;
  Vector coefficients;
  std::vector<std::string> labels;
  Matrix cov_classic;  // cluster-robust, no small-sample factor
  Matrix cov_hc2;      // empty unless requested
  Matrix cov_hc0;      // empty unless requested
  Vector residuals;
  std::vector<std::size_t> clusters;
  std::size_t rank = 0;
  std::vector<std::size_t> dropped_columns;
  std::size_t num_treatment_terms = 0;
  Matrix treatment_basis;
  std::vector<std::string> warnings;

  const Matrix& covariance(CovKind kind) const;
};

/// Weighted least squares on a prepared model matrix.
RegressionFit fit_model(const ModelMatrix& model, const FitOptions& options = {});
RegressionFit fit(const ObservedData& data, const ModelSpec& spec, const FitOptions& options = {});

/// Treatment means implied by the treatment coefficients and their covariance.
MeanEstimate coefficients_to_means(const RegressionFit& fit, CovKind kind = CovKind::classic);
EffectEstimate coefficients_to_effects(const RegressionFit& fit, const ContrastMatrix& g,
                                       CovKind kind = CovKind::classic);

struct CheckReport {
  bool applicable = true;
  double max_abs = 0.0;  // largest entrywise discrepancy
  double scale = 0.0;    // largest entry of the reference side
  std::string note;

  double relative() const noexcept { return scale > 0.0 ? max_abs / scale : max_abs; }
};

/// Classic cluster covariances of unadjusted indicator fits against the
/// closed forms in V̂: wls ↔ 1̂⁻¹ D V̂_haj 1̂⁻¹, ag ↔ D V̂_ht, and on uniform
/// designs also ols ↔ D V̂_ht, with D = diag((W_a − 1)/W_a).
CheckReport classic_cov_identity_check(const ObservedData& data);

/// Refits the unadjusted unit indicator regression with weights scaled by
/// rho(z) per treatment; compares coefficients, HC0 and cluster covariances.
CheckReport weight_scaling_invariance_check(const ObservedData& data, std::span<const double> rho,
                                            Fitting base = Fitting::wls);

/// With covariates constant within whole-plots, additive adjustment leaves the
/// sub-plot and interaction coefficients (and their cluster covariance) of the
/// factor wls and ag fits unchanged. Not applicable otherwise.
CheckReport wholeplot_covariate_invariance_check(const ObservedData& data);

}  // namespace splitplot
