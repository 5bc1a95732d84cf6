#include "splitplot/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "splitplot/error.hpp"

namespace splitplot {

namespace {

constexpr double kLeverageTol = 1e-10;
// Below this the Gram-based gap has lost most of its digits.
constexpr double kRefineGap = 1e-4;

// Eigenpairs of Q_{-c}ᵀ Q_{-c} from a one-sided Jacobi SVD of the rows of Q
// outside cluster c; small gaps come out with relative accuracy.
SymmetricEigen complement_svd(const Matrix& q, const std::vector<std::vector<std::size_t>>& members,
                              std::size_t c) {
  const std::size_t r = q.cols();
  std::vector<std::size_t> rows;
  for (std::size_t v = 0; v < members.size(); ++v)
    if (v != c) rows.insert(rows.end(), members[v].begin(), members[v].end());
  const std::size_t m = rows.size();
  Matrix a(m, r);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < r; ++j) a(i, j) = q(rows[i], j);
  Matrix v = Matrix::identity(r);
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t k = j + 1; k < r; ++k) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += a(i, j) * a(i, j);
          beta += a(i, k) * a(i, k);
          gamma += a(i, j) * a(i, k);
        }
        if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = a(i, j), y = a(i, k);
          a(i, j) = cs * x - sn * y;
          a(i, k) = sn * x + cs * y;
        }
        for (std::size_t i = 0; i < r; ++i) {
          const double x = v(i, j), y = v(i, k);
          v(i, j) = cs * x - sn * y;
          v(i, k) = sn * x + cs * y;
        }
      }
    if (!rotated) break;
  }
  std::vector<std::pair<double, std::size_t>> sv(r);
  for (std::size_t j = 0; j < r; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) ss += a(i, j) * a(i, j);
    sv[j] = {ss, j};
  }
  std::sort(sv.begin(), sv.end());
  SymmetricEigen out{Vector(r), Matrix(r, r)};
  for (std::size_t k = 0; k < r; ++k) {
    out.values[k] = sv[k].first;
    for (std::size_t i = 0; i < r; ++i) out.vectors(i, k) = v(i, sv[k].second);
  }
  return out;
}

std::string treatment_label(const SplitPlotDesign& d, std::size_t z) {
  const auto [a, b] = d.levels(z);
  return "z(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

// Centered factor terms for treatment z: A terms, B terms, then products.
Vector factor_terms(const SplitPlotDesign& d, std::size_t z) {
  const auto [a, b] = d.levels(z);
  const double ta = static_cast<double>(d.t_a());
  const double tb = static_cast<double>(d.t_b());
  Vector f;
  f.reserve(d.num_treatments() - 1);
  for (std::size_t k = 1; k < d.t_a(); ++k) f.push_back((a == k ? 1.0 : 0.0) - 1.0 / ta);
  for (std::size_t k = 1; k < d.t_b(); ++k) f.push_back((b == k ? 1.0 : 0.0) - 1.0 / tb);
  for (std::size_t ka = 1; ka < d.t_a(); ++ka)
    for (std::size_t kb = 1; kb < d.t_b(); ++kb)
      f.push_back(((a == ka ? 1.0 : 0.0) - 1.0 / ta) * ((b == kb ? 1.0 : 0.0) - 1.0 / tb));
  return f;
}

std::vector<std::string> factor_labels(const SplitPlotDesign& d) {
  const ContrastMatrix g = standard_contrasts(d.t_a(), d.t_b());
  std::vector<std::string> labels{"(Intercept)"};
  labels.insert(labels.end(), g.labels.begin(), g.labels.end());
  return labels;
}

// Treatment-term regressors for z (indicator or [1, factor terms]).
Vector treatment_row(const SplitPlotDesign& d, Parameterization p, std::size_t z) {
  Vector r(d.num_treatments(), 0.0);
  if (p == Parameterization::indicator) {
    r[z] = 1.0;
  } else {
    r[0] = 1.0;
    const Vector f = factor_terms(d, z);
    std::copy(f.begin(), f.end(), r.begin() + 1);
  }
  return r;
}

// Candidate covariate columns at unit level, centered over all N units.
Matrix centered_unit_covariates(const ObservedData& data, const ModelSpec& spec, std::vector<std::string>& names) {
  const std::size_t n = data.design().num_units();
  std::vector<std::size_t> cols;
  if (spec.unit_covariates) {
    if (spec.covariate_columns.empty()) {
      for (std::size_t j = 0; j < data.num_covariates(); ++j) cols.push_back(j);
    } else {
      cols = spec.covariate_columns;
    }
  }
  Matrix c(n, cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data.covariates()(i, cols[k]);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) c(i, k) = data.covariates()(i, cols[k]) - mean;
    names.push_back(data.covariate_names()[cols[k]]);
  }
  return c;
}

double max_abs_of(const Matrix& m) { return m.empty() ? 0.0 : max_abs(m); }

void track(CheckReport& r, const Matrix& lhs, const Matrix& rhs) {
  r.max_abs = std::max(r.max_abs, max_abs_diff(lhs, rhs));
  r.scale = std::max(r.scale, max_abs_of(rhs));
}

void track(CheckReport& r, std::span<const double> lhs, std::span<const double> rhs) {
  r.max_abs = std::max(r.max_abs, max_abs_diff(lhs, rhs));
  r.scale = std::max(r.scale, max_abs(rhs));
}

}  // namespace

std::string_view to_string(Fitting f) {
  switch (f) {
    case Fitting::ols: return "ols";
    case Fitting::wls: return "wls";
    case Fitting::ag: return "ag";
  }
  return "?";
}

std::string_view to_string(Adjustment a) {
  switch (a) {
    case Adjustment::none: return "none";
    case Adjustment::additive: return "additive";
    case Adjustment::interacted: return "interacted";
  }
  return "?";
}

std::string_view to_string(Parameterization p) {
  return p == Parameterization::indicator ? "indicator" : "factor";
}

Fitting parse_fitting(std::string_view name) {
  if (name == "ols") return Fitting::ols;
  if (name == "wls") return Fitting::wls;
  if (name == "ag") return Fitting::ag;
  throw InvalidInput("unknown fitting scheme '" + std::string(name) + "'");
}

Adjustment parse_adjustment(std::string_view name) {
  if (name == "none") return Adjustment::none;
  if (name == "additive") return Adjustment::additive;
  if (name == "interacted") return Adjustment::interacted;
  throw InvalidInput("unknown adjustment '" + std::string(name) + "'");
}

Parameterization parse_parameterization(std::string_view name) {
  if (name == "indicator") return Parameterization::indicator;
  if (name == "factor") return Parameterization::factor;
  throw InvalidInput("unknown parameterization '" + std::string(name) + "'");
}

MeanScheme matching_mean_scheme(Fitting f) {
  switch (f) {
    case Fitting::ols: return MeanScheme::sm;
    case Fitting::wls: return MeanScheme::haj;
    case Fitting::ag: return MeanScheme::ht;
  }
  return MeanScheme::ht;
}

ModelSpec make_spec(Fitting fitting, Adjustment adjustment, Parameterization parameterization) {
  ModelSpec s;
  s.fitting = fitting;
  s.adjustment = adjustment;
  s.parameterization = parameterization;
  return s;
}

void validate_spec(const ModelSpec& spec, const ObservedData& data) {
  if (spec.size_factor && spec.level() != Level::aggregate)
    throw InvalidInput("the size-factor covariate is only available for aggregate (ag) fits");
  for (std::size_t j : spec.covariate_columns)
    if (j >= data.num_covariates()) throw InvalidInput("covariate column " + std::to_string(j) + " out of range");
  if (spec.adjustment != Adjustment::none) {
    const std::size_t j =
        spec.unit_covariates ? (spec.covariate_columns.empty() ? data.num_covariates() : spec.covariate_columns.size()) : 0;
    if (j == 0 && !spec.size_factor) throw InvalidInput("covariate adjustment requested but no covariates selected");
  }
}

ModelMatrix build_model(const ObservedData& data, const ModelSpec& spec) {
  validate_spec(spec, data);
  const SplitPlotDesign& d = data.design();
  const std::size_t nt = d.num_treatments();
  const bool adjust = spec.adjustment != Adjustment::none;

  std::vector<std::string> cov_names;
  const Matrix unit_cov = adjust ? centered_unit_covariates(data, spec, cov_names) : Matrix(d.num_units(), 0);

  // Rows of (treatment, outcome, weight, cluster, covariates) at the fit's level.
  std::vector<std::size_t> row_z;
  std::vector<std::size_t> row_w;
  Vector y;
  Vector wt;
  Matrix cov;
  if (spec.level() == Level::unit) {
    row_z = data.unit_treatments();
    row_w = data.unit_plots();
    y = data.outcomes();
    wt.resize(d.num_units());
    for (std::size_t i = 0; i < wt.size(); ++i)
      wt[i] = spec.fitting == Fitting::wls ? 1.0 / d.inclusion_probability(row_w[i], row_z[i]) : 1.0;
    cov = unit_cov;
  } else {
    const std::size_t tb = d.t_b();
    const std::size_t rows = d.num_plots() * tb;
    const std::size_t jx = unit_cov.cols();
    const std::size_t jc = jx + (adjust && spec.size_factor ? 1 : 0);
    if (adjust && spec.size_factor) cov_names.push_back("size");
    cov = Matrix(rows, jc);
    y.assign(rows, 0.0);
    wt.assign(rows, 1.0);
    std::vector<std::size_t> count(rows, 0);
    for (std::size_t w = 0; w < d.num_plots(); ++w) {
      const std::size_t a = data.assignment().a_levels[w];
      const auto& bl = data.assignment().b_levels[w];
      for (std::size_t b = 0; b < tb; ++b) {
        row_z.push_back(d.treatment(a, b));
        row_w.push_back(w);
      }
      for (std::size_t s = 0; s < bl.size(); ++s) {
        const std::size_t r = w * tb + bl[s];
        const std::size_t i = d.unit_offset(w) + s;
        y[r] += data.outcomes()[i];
        for (std::size_t j = 0; j < jx; ++j) cov(r, j) += unit_cov(i, j);
        ++count[r];
      }
      const double alpha = d.size_factor(w);
      for (std::size_t b = 0; b < tb; ++b) {
        const std::size_t r = w * tb + b;
        const double f = alpha / static_cast<double>(count[r]);
        y[r] *= f;
        for (std::size_t j = 0; j < jx; ++j) cov(r, j) *= f;
        if (jc > jx) cov(r, jx) = alpha - 1.0;
      }
    }
  }

  const std::size_t n = y.size();
  const std::size_t jc = cov.cols();
  const std::size_t p = spec.adjustment == Adjustment::interacted ? nt * (1 + jc) : nt + jc;
  ModelMatrix m;
  m.x = Matrix(n, p);
  m.num_treatment_terms = nt;
  m.parameterization = spec.parameterization;
  m.fitting = spec.fitting;

  if (spec.parameterization == Parameterization::indicator) {
    for (std::size_t z = 0; z < nt; ++z) m.labels.push_back(treatment_label(d, z));
  } else {
    m.labels = factor_labels(d);
  }
  m.treatment_basis = Matrix(nt, nt);
  for (std::size_t z = 0; z < nt; ++z) {
    const Vector r = treatment_row(d, spec.parameterization, z);
    std::copy(r.begin(), r.end(), m.treatment_basis.row(z).begin());
  }

  if (spec.adjustment == Adjustment::additive) {
    m.labels.insert(m.labels.end(), cov_names.begin(), cov_names.end());
  } else if (spec.adjustment == Adjustment::interacted) {
    if (spec.parameterization == Parameterization::indicator) {
      for (std::size_t z = 0; z < nt; ++z)
        for (const auto& c : cov_names) m.labels.push_back(m.labels[z] + ":" + c);
    } else {
      // 1 + f + c + f⊗c
      m.labels.insert(m.labels.end(), cov_names.begin(), cov_names.end());
      for (std::size_t k = 1; k < nt; ++k)
        for (const auto& c : cov_names) m.labels.push_back(m.labels[k] + ":" + c);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& basis = m.treatment_basis.row(row_z[i]);
    auto xi = m.x.row(i);
    std::copy(basis.begin(), basis.end(), xi.begin());
    if (spec.adjustment == Adjustment::additive) {
      for (std::size_t j = 0; j < jc; ++j) xi[nt + j] = cov(i, j);
    } else if (spec.adjustment == Adjustment::interacted) {
      if (spec.parameterization == Parameterization::indicator) {
        for (std::size_t j = 0; j < jc; ++j) xi[nt + row_z[i] * jc + j] = cov(i, j);
      } else {
        for (std::size_t j = 0; j < jc; ++j) xi[nt + j] = cov(i, j);
        for (std::size_t k = 1; k < nt; ++k)
          for (std::size_t j = 0; j < jc; ++j) xi[nt + k * jc + j] = basis[k] * cov(i, j);
      }
    }
  }

  m.y = std::move(y);
  m.weights = std::move(wt);
  m.clusters = std::move(row_w);
  m.treatments = std::move(row_z);
  return m;
}

const Matrix& RegressionFit::covariance(CovKind kind) const {
  if (kind == CovKind::hc2) {
    if (cov_hc2.empty() && !coefficients.empty()) throw InvalidInput("HC2 covariance was not computed for this fit");
    return cov_hc2;
  }
  return cov_classic;
}

RegressionFit fit_model(const ModelMatrix& model, const FitOptions& options) {
  const std::size_t n = model.x.rows();
  const std::size_t p = model.x.cols();
  if (model.y.size() != n || model.weights.size() != n || model.clusters.size() != n)
    throw InvalidInput("model matrix: inconsistent row counts");
  const LsSolution sol = wls_solve(model.x, model.y, model.weights, model.num_treatment_terms);

  RegressionFit fit;
  fit.coefficients = sol.coefficients;
  fit.labels = model.labels;
  fit.residuals = sol.residuals;
  fit.clusters = model.clusters;
  fit.rank = sol.rank;
  fit.dropped_columns = sol.dropped_columns;
  fit.num_treatment_terms = model.num_treatment_terms;
  fit.treatment_basis = model.treatment_basis;
  for (std::size_t j : sol.dropped_columns) {
    if (j < model.num_treatment_terms)
      throw InvalidInput("treatment term '" + model.labels[j] + "' is collinear with other columns");
    fit.warnings.push_back("column '" + model.labels[j] + "' dropped as collinear");
  }

  // Sandwiches are assembled on the thin QR factor: with √W X = Q R the score
  // of a cluster maps to Rᵀ Q_wᵀ ẽ_w, so cov = R⁻¹ (Σ s_w s_wᵀ) R⁻ᵀ and the
  // Gram matrix is never inverted explicitly.
  const std::size_t r = sol.rank;
  std::size_t num_clusters = 0;
  for (std::size_t c : model.clusters) num_clusters = std::max(num_clusters, c + 1);
  std::vector<std::vector<std::size_t>> members(num_clusters);
  for (std::size_t i = 0; i < n; ++i) members[model.clusters[i]].push_back(i);

  Vector et(n);
  for (std::size_t i = 0; i < n; ++i) et[i] = std::sqrt(model.weights[i]) * sol.residuals[i];

  // Q_wᵀQ_w per cluster; for HC2 the complement Σ_{v≠w} Q_vᵀQ_v = I − Q_wᵀQ_w
  // is rebuilt from prefix and suffix sums so leverages near 1 keep their gap.
  std::vector<Matrix> blocks;
  if (options.hc2) {
    blocks.assign(num_clusters, Matrix(r, r));
    for (std::size_t c = 0; c < num_clusters; ++c)
      for (std::size_t i : members[c])
        for (std::size_t j = 0; j < r; ++j)
          for (std::size_t k = 0; k <= j; ++k) blocks[c](j, k) += sol.q(i, j) * sol.q(i, k);
    for (auto& b : blocks)
      for (std::size_t j = 0; j < r; ++j)
        for (std::size_t k = 0; k < j; ++k) b(k, j) = b(j, k);
  }
  std::vector<Matrix> suffix;
  if (options.hc2) {
    suffix.assign(num_clusters + 1, Matrix(r, r));
    for (std::size_t c = num_clusters; c-- > 0;) suffix[c] = suffix[c + 1] + blocks[c];
  }
  Matrix prefix(r, r);

  Matrix meat(r, r);
  Matrix meat_hc2(r, r);
  Matrix meat_hc0(r, r);
  Vector s(r);
  for (std::size_t c = 0; c < num_clusters; ++c) {
    const auto& rows = members[c];
    std::fill(s.begin(), s.end(), 0.0);
    for (std::size_t i : rows)
      for (std::size_t j = 0; j < r; ++j) s[j] += sol.q(i, j) * et[i];
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t k = 0; k < r; ++k) meat(j, k) += s[j] * s[k];

    if (options.hc0) {
      for (std::size_t i : rows)
        for (std::size_t j = 0; j < r; ++j)
          for (std::size_t k = 0; k < r; ++k) meat_hc0(j, k) += et[i] * et[i] * sol.q(i, j) * sol.q(i, k);
    }

    if (options.hc2 && !rows.empty()) {
      // Q_wᵀ (I − P_w)^{-1/2} ẽ_w = C_w^{-1/2} Q_wᵀ ẽ_w with C_w the complement
      // above; directions with gap at or below the tolerance get weight 0.
      SymmetricEigen ce = symmetric_eigen(symmetrize(prefix + suffix[c + 1]));
      if (r > 0 && ce.values[0] < kRefineGap) ce = complement_svd(sol.q, members, c);
      Vector s2(r, 0.0);
      for (std::size_t k = 0; k < r; ++k) {
        const double gap = ce.values[k];
        if (!(gap > kLeverageTol)) continue;
        double proj = 0.0;
        for (std::size_t j = 0; j < r; ++j) proj += ce.vectors(j, k) * s[j];
        proj /= std::sqrt(gap);
        for (std::size_t j = 0; j < r; ++j) s2[j] += proj * ce.vectors(j, k);
      }
      for (std::size_t j = 0; j < r; ++j)
        for (std::size_t k = 0; k < r; ++k) meat_hc2(j, k) += s2[j] * s2[k];
      prefix = prefix + blocks[c];
    }
  }

  auto to_columns = [&](const Matrix& m) {
    const Matrix inner = symmetrize(sol.r_inverse * m * sol.r_inverse.transpose());
    Matrix out(p, p);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) out(sol.order[i], sol.order[j]) = inner(i, j);
    return out;
  };
  fit.cov_classic = to_columns(meat);
  if (options.hc2) fit.cov_hc2 = to_columns(meat_hc2);
  if (options.hc0) fit.cov_hc0 = to_columns(meat_hc0);
  return fit;
}

RegressionFit fit(const ObservedData& data, const ModelSpec& spec, const FitOptions& options) {
  RegressionFit f = fit_model(build_model(data, spec), options);
  f.spec = spec;
  return f;
}

MeanEstimate coefficients_to_means(const RegressionFit& fit, CovKind kind) {
  const std::size_t nt = fit.num_treatment_terms;
  if (fit.treatment_basis.rows() != nt || fit.treatment_basis.cols() != nt)
    throw InvalidInput("fit has no treatment-term mapping");
  const Matrix& v = fit.covariance(kind);
  MeanEstimate m;
  m.scheme = matching_mean_scheme(fit.spec.fitting);
  m.means = fit.treatment_basis * std::span<const double>(fit.coefficients.data(), nt);
  m.covariance = symmetrize(fit.treatment_basis * v.block(0, 0, nt, nt) * fit.treatment_basis.transpose());
  return m;
}

EffectEstimate coefficients_to_effects(const RegressionFit& fit, const ContrastMatrix& g, CovKind kind) {
  return apply_contrast(g, coefficients_to_means(fit, kind));
}

CheckReport classic_cov_identity_check(const ObservedData& data) {
  const SplitPlotDesign& d = data.design();
  const std::size_t nt = d.num_treatments();
  Vector dfac(nt);
  for (std::size_t z = 0; z < nt; ++z) {
    const double wa = static_cast<double>(d.whole_plot_count(d.levels(z).first));
    dfac[z] = (wa - 1.0) / wa;
  }
  const FitOptions opts{.hc2 = false};
  CheckReport r;

  const MeanEstimate haj = estimate_means(data, MeanScheme::haj);
  const RegressionFit wls = fit(data, make_spec(Fitting::wls), opts);
  Matrix expect(nt, nt);
  for (std::size_t z = 0; z < nt; ++z)
    for (std::size_t z2 = 0; z2 < nt; ++z2)
      expect(z, z2) = dfac[z] * haj.covariance(z, z2) / (haj.ht_ones[z] * haj.ht_ones[z2]);
  track(r, wls.cov_classic, expect);

  const MeanEstimate ht = estimate_means(data, MeanScheme::ht);
  Matrix expect_ht(nt, nt);
  for (std::size_t z = 0; z < nt; ++z)
    for (std::size_t z2 = 0; z2 < nt; ++z2) expect_ht(z, z2) = dfac[z] * ht.covariance(z, z2);
  const RegressionFit ag = fit(data, make_spec(Fitting::ag), opts);
  track(r, ag.cov_classic, expect_ht);

  if (d.is_uniform()) {
    const RegressionFit ols = fit(data, make_spec(Fitting::ols), opts);
    track(r, ols.cov_classic, expect_ht);
    r.note = "wls, ag and ols";
  } else {
    r.note = "wls and ag";
  }
  return r;
}

CheckReport weight_scaling_invariance_check(const ObservedData& data, std::span<const double> rho, Fitting base) {
  const SplitPlotDesign& d = data.design();
  if (rho.size() != d.num_treatments()) throw InvalidInput("need one scale factor per treatment");
  for (double v : rho)
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput("scale factors must be positive and finite");
  if (base == Fitting::ag) throw InvalidInput("weight scaling applies to unit-level fits");
  const ModelMatrix plain = build_model(data, make_spec(base));
  ModelMatrix scaled = plain;
  for (std::size_t i = 0; i < scaled.weights.size(); ++i) scaled.weights[i] *= rho[scaled.treatments[i]];
  const FitOptions opts{.hc2 = false, .hc0 = true};
  const RegressionFit f0 = fit_model(plain, opts);
  const RegressionFit f1 = fit_model(scaled, opts);
  CheckReport r;
  track(r, f1.coefficients, f0.coefficients);
  track(r, f1.cov_hc0, f0.cov_hc0);
  track(r, f1.cov_classic, f0.cov_classic);
  r.note = "coefficients, HC0 and cluster-robust covariance";
  return r;
}

CheckReport wholeplot_covariate_invariance_check(const ObservedData& data) {
  const SplitPlotDesign& d = data.design();
  CheckReport r;
  if (data.num_covariates() == 0) {
    r.applicable = false;
    r.note = "no covariates";
    return r;
  }
  for (std::size_t j = 0; j < data.num_covariates(); ++j)
    for (std::size_t w = 0; w < d.num_plots(); ++w) {
      const double first = data.covariates()(d.unit_offset(w), j);
      for (std::size_t s = 1; s < d.plot_size(w); ++s)
        if (data.covariates()(d.unit_offset(w) + s, j) != first) {
          r.applicable = false;
          r.note = "covariate '" + data.covariate_names()[j] + "' varies within whole-plot " + std::to_string(w);
          return r;
        }
    }
  // Sub-plot main effects and interactions follow the intercept and the A terms.
  const std::size_t lo = 1 + (d.t_a() - 1);
  const std::size_t nt = d.num_treatments();
  for (Fitting f : {Fitting::wls, Fitting::ag}) {
    const ModelSpec base = make_spec(f, Adjustment::none, Parameterization::factor);
    ModelSpec adj = base;
    adj.adjustment = Adjustment::additive;
    const RegressionFit f0 = fit(data, base, FitOptions{.hc2 = false});
    const RegressionFit f1 = fit(data, adj, FitOptions{.hc2 = false});
    track(r, std::span<const double>(f1.coefficients).subspan(lo, nt - lo),
          std::span<const double>(f0.coefficients).subspan(lo, nt - lo));
    track(r, f1.cov_classic.block(lo, lo, nt - lo, nt - lo), f0.cov_classic.block(lo, lo, nt - lo, nt - lo));
  }
  r.note = "sub-plot and interaction terms under wls and ag";
  return r;
}

}  // namespace splitplot
