#include "splitplot/estimators.hpp"

#include <cmath>
#include <string>

#include "splitplot/error.hpp"

namespace splitplot {

namespace {

// Per-plot means of a unit column over the sub-plots at each level b.
struct PlotCells {
  Matrix mean;  // W × t_b
  std::vector<std::vector<std::size_t>> count;
};

PlotCells plot_cells(const ObservedData& data, std::span<const double> values) {
  const SplitPlotDesign& d = data.design();
  if (values.size() != d.num_units()) throw InvalidInput("unit column length differs from N");
  PlotCells c{Matrix(d.num_plots(), d.t_b()), std::vector<std::vector<std::size_t>>(d.num_plots(), std::vector<std::size_t>(d.t_b(), 0))};
  for (std::size_t w = 0; w < d.num_plots(); ++w) {
    const auto& bl = data.assignment().b_levels[w];
    for (std::size_t s = 0; s < bl.size(); ++s) {
      c.mean(w, bl[s]) += values[d.unit_offset(w) + s];
      ++c.count[w][bl[s]];
    }
    for (std::size_t b = 0; b < d.t_b(); ++b) {
      if (c.count[w][b] == 0) throw InvalidInput("plot " + std::to_string(w) + " has no unit at level " + std::to_string(b));
      c.mean(w, b) /= static_cast<double>(c.count[w][b]);
    }
  }
  return c;
}

Vector ht_ones(const ObservedData& data) {
  const SplitPlotDesign& d = data.design();
  Vector ones(d.num_treatments(), 0.0);
  for (std::size_t w = 0; w < d.num_plots(); ++w) {
    const std::size_t a = data.assignment().a_levels[w];
    for (std::size_t b = 0; b < d.t_b(); ++b) ones[d.treatment(a, b)] += d.size_factor(w);
  }
  for (std::size_t z = 0; z < ones.size(); ++z)
    ones[z] /= static_cast<double>(d.whole_plot_count(d.levels(z).first));
  return ones;
}

Vector means_from_cells(const ObservedData& data, const PlotCells& cells, std::span<const double> values,
                        MeanScheme scheme) {
  const SplitPlotDesign& d = data.design();
  const std::size_t nt = d.num_treatments();
  Vector m(nt, 0.0);
  if (scheme == MeanScheme::sm) {
    std::vector<std::size_t> n_z(nt, 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      m[data.unit_treatments()[i]] += values[i];
      ++n_z[data.unit_treatments()[i]];
    }
    for (std::size_t z = 0; z < nt; ++z) {
      if (n_z[z] == 0) throw InvalidInput("treatment " + std::to_string(z) + " is never observed");
      m[z] /= static_cast<double>(n_z[z]);
    }
    return m;
  }
  for (std::size_t w = 0; w < d.num_plots(); ++w) {
    const std::size_t a = data.assignment().a_levels[w];
    for (std::size_t b = 0; b < d.t_b(); ++b) m[d.treatment(a, b)] += d.size_factor(w) * cells.mean(w, b);
  }
  for (std::size_t z = 0; z < nt; ++z) m[z] /= static_cast<double>(d.whole_plot_count(d.levels(z).first));
  if (scheme == MeanScheme::haj) {
    const Vector ones = ht_ones(data);
    for (std::size_t z = 0; z < nt; ++z) m[z] /= ones[z];
  }
  return m;
}

#ifndef NDEBUG
// Unit-sum form N⁻¹ Σ_{Z_ws = z} Y_ws / p_ws(z).
void check_unit_sum_form(const ObservedData& data, const Vector& ht) {
  const SplitPlotDesign& d = data.design();
  Vector alt(d.num_treatments(), 0.0);
  for (std::size_t i = 0; i < d.num_units(); ++i) {
    const std::size_t z = data.unit_treatments()[i];
    alt[z] += data.outcomes()[i] / d.inclusion_probability(data.unit_plots()[i], z);
  }
  for (double& v : alt) v /= static_cast<double>(d.num_units());
  const double tol = 1e-9 * std::max(1.0, max_abs(ht));
  if (max_abs_diff(alt, ht) > tol) throw NumericError("HT mean disagrees with its unit-sum form");
}
#endif

Matrix vhat_from_cells(const ObservedData& data, const PlotCells& cells, const Vector& means, MeanScheme scheme) {
  const SplitPlotDesign& d = data.design();
  const std::size_t nt = d.num_treatments();
  const std::size_t tb = d.t_b();
  Matrix v(nt, nt);
  std::vector<std::size_t> n_z;
  if (scheme == MeanScheme::sm) {
    n_z.assign(nt, 0);
    for (std::size_t z : data.unit_treatments()) ++n_z[z];
  }
  Vector dev(tb);
  for (std::size_t w = 0; w < d.num_plots(); ++w) {
    const std::size_t a = data.assignment().a_levels[w];
    const double alpha = d.size_factor(w);
    for (std::size_t b = 0; b < tb; ++b) {
      const std::size_t z = d.treatment(a, b);
      switch (scheme) {
        case MeanScheme::ht: dev[b] = alpha * cells.mean(w, b) - means[z]; break;
        case MeanScheme::haj: dev[b] = alpha * (cells.mean(w, b) - means[z]); break;
        case MeanScheme::sm:
          dev[b] = static_cast<double>(cells.count[w][b]) * (cells.mean(w, b) - means[z]) / static_cast<double>(n_z[z]);
          break;
      }
    }
    const double wa = static_cast<double>(d.whole_plot_count(a));
    // ht/haj: Ŝ/W_a with Ŝ = (W_a − 1)⁻¹ Σ dev devᵀ; sm: W_a/(W_a − 1) Σ dev devᵀ.
    const double f = scheme == MeanScheme::sm ? wa / (wa - 1.0) : 1.0 / ((wa - 1.0) * wa);
    for (std::size_t b = 0; b < tb; ++b)
      for (std::size_t b2 = 0; b2 < tb; ++b2) v(a * tb + b, a * tb + b2) += f * dev[b] * dev[b2];
  }
  return v;
}

}  // namespace

std::string_view to_string(MeanScheme scheme) {
  switch (scheme) {
    case MeanScheme::sm: return "sm";
    case MeanScheme::ht: return "ht";
    case MeanScheme::haj: return "haj";
  }
  return "?";
}

MeanScheme parse_mean_scheme(std::string_view name) {
  if (name == "sm") return MeanScheme::sm;
  if (name == "ht") return MeanScheme::ht;
  if (name == "haj") return MeanScheme::haj;
  throw InvalidInput("unknown mean scheme '" + std::string(name) + "'");
}

Vector treatment_means(const ObservedData& data, std::span<const double> unit_values, MeanScheme scheme) {
  const PlotCells cells = plot_cells(data, unit_values);
  return means_from_cells(data, cells, unit_values, scheme);
}

MeanEstimate estimate_means(const ObservedData& data, MeanScheme scheme) {
  const PlotCells cells = plot_cells(data, data.outcomes());
  MeanEstimate m;
  m.scheme = scheme;
  m.means = means_from_cells(data, cells, data.outcomes(), scheme);
#ifndef NDEBUG
  if (scheme == MeanScheme::ht) check_unit_sum_form(data, m.means);
#endif
  m.covariance = vhat_from_cells(data, cells, m.means, scheme);
  m.ht_ones = ht_ones(data);
  m.sample_sizes.assign(data.design().num_treatments(), 0);
  for (std::size_t z : data.unit_treatments()) ++m.sample_sizes[z];
  return m;
}

Matrix vhat(const ObservedData& data, MeanScheme scheme) { return estimate_means(data, scheme).covariance; }

EffectEstimate apply_contrast(const ContrastMatrix& g, const MeanEstimate& m) {
  return apply_contrast(g, m.means, m.covariance);
}

MomentSummary true_moments(const PotentialOutcomeTable& pot) {
  const SplitPlotDesign& d = pot.design();
  const std::size_t nt = d.num_treatments();
  const std::size_t np = d.num_plots();
  const double wd = static_cast<double>(np);
  MomentSummary m;
  m.mean.resize(nt);
  for (std::size_t z = 0; z < nt; ++z) m.mean[z] = pot.mean(z);

  Matrix plot_means(np, nt);
  for (std::size_t w = 0; w < np; ++w)
    for (std::size_t z = 0; z < nt; ++z) plot_means(w, z) = pot.plot_mean(w, z);

  m.s_ht = Matrix(nt, nt);
  m.s_haj = Matrix(nt, nt);
  for (std::size_t w = 0; w < np; ++w) {
    const double alpha = d.size_factor(w);
    for (std::size_t z = 0; z < nt; ++z)
      for (std::size_t z2 = 0; z2 < nt; ++z2) {
        m.s_ht(z, z2) += (alpha * plot_means(w, z) - m.mean[z]) * (alpha * plot_means(w, z2) - m.mean[z2]);
        m.s_haj(z, z2) += alpha * alpha * (plot_means(w, z) - m.mean[z]) * (plot_means(w, z2) - m.mean[z2]);
      }
  }
  m.s_ht = (1.0 / (wd - 1.0)) * m.s_ht;
  m.s_haj = (1.0 / (wd - 1.0)) * m.s_haj;

  m.h = Matrix(nt, nt);
  for (std::size_t z = 0; z < nt; ++z)
    for (std::size_t z2 = 0; z2 < nt; ++z2) {
      const auto a = d.levels(z).first;
      m.h(z, z2) = (a == d.levels(z2).first ? 1.0 / d.p_a(a) : 0.0) - 1.0;
    }

  m.psi = Matrix(nt, nt);
  for (std::size_t w = 0; w < np; ++w) {
    const std::size_t mw = d.plot_size(w);
    const double alpha = d.size_factor(w);
    Matrix sw(nt, nt);
    for (std::size_t s = 0; s < mw; ++s)
      for (std::size_t z = 0; z < nt; ++z)
        for (std::size_t z2 = 0; z2 < nt; ++z2)
          sw(z, z2) += (pot.value(w, s, z) - plot_means(w, z)) * (pot.value(w, s, z2) - plot_means(w, z2));
    sw = (alpha * alpha / static_cast<double>(mw - 1)) * sw;

    Matrix hw(nt, nt);
    for (std::size_t z = 0; z < nt; ++z)
      for (std::size_t z2 = 0; z2 < nt; ++z2) {
        const auto [a, b] = d.levels(z);
        if (a != d.levels(z2).first) continue;
        hw(z, z2) = ((z == z2 ? 1.0 / d.q_wb(w, b) : 0.0) - 1.0) / d.p_a(a);
      }
    m.psi = m.psi + (1.0 / (wd * static_cast<double>(mw))) * hadamard(hw, sw);
    m.s_w.push_back(std::move(sw));
    m.h_w.push_back(std::move(hw));
  }

  m.size_moments.assign(3, 0.0);
  for (double alpha : d.size_factors()) {
    m.size_moments[0] += alpha;
    m.size_moments[1] += alpha * alpha;
    m.size_moments[2] += alpha * alpha * alpha * alpha;
  }
  for (double& v : m.size_moments) v /= wd;
  return m;
}

Matrix true_cov_ht(const PotentialOutcomeTable& pot) {
  const MomentSummary m = true_moments(pot);
  const double wd = static_cast<double>(pot.design().num_plots());
  return (1.0 / wd) * (hadamard(m.h, m.s_ht) + m.psi);
}

Vector hajek_ht_asymptotic_gap(const PotentialOutcomeTable& pot) {
  const MomentSummary m = true_moments(pot);
  const SplitPlotDesign& d = pot.design();
  Vector gap(d.num_treatments());
  for (std::size_t z = 0; z < gap.size(); ++z)
    gap[z] = (1.0 / d.p_a(d.levels(z).first) - 1.0) * (m.s_haj(z, z) - m.s_ht(z, z));
  return gap;
}

Matrix vhat_ht_bias(const PotentialOutcomeTable& pot) {
  return (1.0 / static_cast<double>(pot.design().num_plots())) * true_moments(pot).s_ht;
}

}  // namespace splitplot
