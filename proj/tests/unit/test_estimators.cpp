#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "splitplot/contrasts.hpp"
#include "splitplot/error.hpp"
#include "splitplot/estimators.hpp"

using namespace splitplot;

TEST_CASE("standard 2x2 contrasts") {
  const ContrastMatrix g = standard_contrasts(2, 2);
  const Matrix expect{{-0.5, -0.5, 0.5, 0.5}, {-0.5, 0.5, -0.5, 0.5}, {1, -1, -1, 1}};
  CHECK(g.g == expect);
  CHECK(g.labels == std::vector<std::string>{"A", "B", "AB"});
  CHECK(standard_contrasts(2, 2, true).g(2, 0) == 0.5);
}

TEST_CASE("3x2 main effect row") {
  const ContrastMatrix g = standard_contrasts(3, 2);
  CHECK(g.g.rows() == 2 + 1 + 2);
  const Vector y{1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  const Vector t = g.g * y;
  // ½{Ȳ(10)+Ȳ(11)} − ½{Ȳ(00)+Ȳ(01)}
  CHECK(t[0] == doctest::Approx(0.5 * (4 + 8) - 0.5 * (1 + 2)));
  CHECK(g.labels[0] == "A1");
  for (std::size_t k = 0; k < g.g.rows(); ++k) {
    double s = 0;
    for (double v : g.g.row(k)) s += v;
    CHECK(std::abs(s) < 1e-12);
  }
  CHECK_THROWS_AS(standard_contrasts(1, 2), InvalidInput);
}

TEST_CASE("contrast validation and application") {
  CHECK_THROWS_AS(make_contrast(Matrix{{1, 0, 0, 0}}, {"bad"}), InvalidInput);
  const ContrastMatrix zero = make_contrast(Matrix(1, 4), {"zero"});
  const EffectEstimate e = apply_contrast(zero, Vector{1, 2, 3, 4}, Matrix::identity(4));
  CHECK(e.estimates[0] == 0.0);
  CHECK(e.covariance(0, 0) == 0.0);
  const EffectEstimate f = apply_contrast(standard_contrasts(2, 2), Vector{2.5, 5, 2, 4}, Matrix(4, 4));
  CHECK(f.estimates[0] == doctest::Approx(-0.75));
  CHECK(f.estimates[1] == doctest::Approx(2.25));
  CHECK(f.estimates[2] == doctest::Approx(-0.5));
}

TEST_CASE("fixture means and covariance") {
  const ObservedData f1 = sptest::fixture_f1();
  const MeanEstimate ht = estimate_means(f1, MeanScheme::ht);
  const Vector expect{2.5, 5, 2, 4};
  CHECK(max_abs_diff(ht.means, expect) < 1e-12);
  for (MeanScheme s : {MeanScheme::sm, MeanScheme::haj})
    CHECK(max_abs_diff(estimate_means(f1, s).means, expect) < 1e-12);
  CHECK(ht.covariance(0, 0) == doctest::Approx(0.25));
  // block-diagonal in the whole-plot level
  CHECK(ht.covariance(0, 2) == 0.0);
  CHECK(ht.covariance(1, 3) == 0.0);
  for (double v : ht.ht_ones) CHECK(v == 1.0);
}

TEST_CASE("Hajek is location invariant, HT shifts by its estimate of one") {
  std::mt19937_64 gen(21);
  for (int rep = 0; rep < 10; ++rep) {
    const ObservedData data = sptest::random_data(gen, sptest::random_nonuniform_design(gen, 2, 3));
    Vector y = data.outcomes();
    for (auto& v : y) v = 7.0;
    const MeanEstimate c = estimate_means(data.with_outcomes(y), MeanScheme::haj);
    for (double m : c.means) CHECK(m == doctest::Approx(7.0));

    Vector shifted = data.outcomes();
    for (auto& v : shifted) v += 3.0;
    const ObservedData s = data.with_outcomes(shifted);
    const MeanEstimate h0 = estimate_means(data, MeanScheme::haj), h1 = estimate_means(s, MeanScheme::haj);
    const MeanEstimate t0 = estimate_means(data, MeanScheme::ht), t1 = estimate_means(s, MeanScheme::ht);
    const MeanEstimate m0 = estimate_means(data, MeanScheme::sm), m1 = estimate_means(s, MeanScheme::sm);
    for (std::size_t z = 0; z < h0.means.size(); ++z) {
      CHECK(h1.means[z] - h0.means[z] == doctest::Approx(3.0));
      CHECK(m1.means[z] - m0.means[z] == doctest::Approx(3.0));
      CHECK(t1.means[z] - t0.means[z] == doctest::Approx(3.0 * t0.ht_ones[z]));
    }
    CHECK(max_abs_diff(h0.covariance, h1.covariance) < 1e-10);
  }
}

TEST_CASE("HT means equal the unit-sum form") {
  std::mt19937_64 gen(22);
  const ObservedData data = sptest::random_data(gen, sptest::random_nonuniform_design(gen, 3, 2));
  const SplitPlotDesign& d = data.design();
  Vector alt(d.num_treatments(), 0.0);
  for (std::size_t i = 0; i < d.num_units(); ++i) {
    const std::size_t z = data.unit_treatments()[i];
    alt[z] += data.outcomes()[i] / d.inclusion_probability(data.unit_plots()[i], z) / double(d.num_units());
  }
  CHECK(max_abs_diff(alt, estimate_means(data, MeanScheme::ht).means) < 1e-10);
}

TEST_CASE("uniform designs collapse the three means") {
  std::mt19937_64 gen(23);
  for (int rep = 0; rep < 10; ++rep) {
    const ObservedData data = sptest::random_data(gen, sptest::random_design(gen, 2, 2, 2, 5, 2, 5, true));
    const MeanEstimate ht = estimate_means(data, MeanScheme::ht);
    CHECK(max_abs_diff(ht.means, estimate_means(data, MeanScheme::sm).means) < 1e-12);
    CHECK(max_abs_diff(ht.means, estimate_means(data, MeanScheme::haj).means) < 1e-12);
    for (double v : ht.ht_ones) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(max_abs_diff(ht.covariance, estimate_means(data, MeanScheme::sm).covariance) < 1e-12);
  }
}

TEST_CASE("constant plot totals give zero HT covariance") {
  const SplitPlotDesign d(2, 2, {2, 2}, {{2, 2}, {2, 2}, {4, 4}, {4, 4}});
  const Assignment x = randomize(d, 5);
  Vector y(d.num_units());
  for (std::size_t w = 0; w < 4; ++w)
    for (std::size_t s = 0; s < d.plot_size(w); ++s) y[d.unit_offset(w) + s] = 3.0 / d.size_factor(w);
  CHECK(max_abs(vhat(ObservedData(d, x, y), MeanScheme::ht)) < 1e-12);
}

TEST_CASE("finite-population moments") {
  std::mt19937_64 gen(24);
  const SplitPlotDesign d = sptest::tiny_design();
  const PotentialOutcomeTable pot = sptest::random_population(gen, d);
  const MomentSummary m = true_moments(pot);
  for (std::size_t z = 0; z < 4; ++z)
    for (std::size_t z2 = 0; z2 < 4; ++z2)
      CHECK(m.h(z, z2) == (d.levels(z).first == d.levels(z2).first ? 1.0 : -1.0));
  // Ψ recomposition
  Matrix psi(4, 4);
  for (std::size_t w = 0; w < 4; ++w) psi = psi + (1.0 / (4.0 * double(d.plot_size(w)))) * hadamard(m.h_w[w], m.s_w[w]);
  CHECK(max_abs_diff(psi, m.psi) < 1e-14);

  // within-plot-constant outcomes: Ψ = 0 and cov = W⁻¹ H∘S
  Matrix t(16, 4);
  for (std::size_t w = 0; w < 4; ++w)
    for (std::size_t s = 0; s < 4; ++s)
      for (std::size_t z = 0; z < 4; ++z) t(d.unit_offset(w) + s, z) = pot.plot_mean(w, z);
  const PotentialOutcomeTable flat(d, t);
  const MomentSummary mf = true_moments(flat);
  CHECK(max_abs(mf.psi) < 1e-12);
  for (const auto& sw : mf.s_w) CHECK(max_abs(sw) < 1e-12);
  CHECK(max_abs_diff(true_cov_ht(flat), 0.25 * hadamard(mf.h, mf.s_ht)) < 1e-14);
}

namespace {
int z_sign(std::size_t w) { return w % 2 == 0 ? 1 : -1; }
}  // namespace

TEST_CASE("gap and bias closed forms") {
  std::mt19937_64 gen(25);
  // all α_w = 1 → zero gap
  const PotentialOutcomeTable uni = sptest::random_population(gen, sptest::tiny_design());
  for (double g : hajek_ht_asymptotic_gap(uni)) CHECK(std::abs(g) < 1e-12);

  const SplitPlotDesign d(2, 2, {2, 3}, {{2, 2}, {3, 2}, {4, 4}, {2, 5}, {3, 3}});
  Matrix a(d.num_units(), 4), b(d.num_units(), 4);
  for (std::size_t w = 0; w < d.num_plots(); ++w) {
    const double centre = 0.5 * double(d.plot_size(w) - 1);
    for (std::size_t s = 0; s < d.plot_size(w); ++s) {
      const double dev = 0.3 * (double(s) - centre) * double(z_sign(w));
      for (std::size_t z = 0; z < 4; ++z) {
        // plot means constant over w
        a(d.unit_offset(w) + s, z) = 1.0 + double(z) + dev;
        // α_w Ȳ_w constant over w
        b(d.unit_offset(w) + s, z) = (2.0 + double(z)) / d.size_factor(w) + dev;
      }
    }
  }
  for (double g : hajek_ht_asymptotic_gap(PotentialOutcomeTable(d, a))) CHECK(g <= 0.0);
  for (double g : hajek_ht_asymptotic_gap(PotentialOutcomeTable(d, b))) CHECK(g >= 0.0);

  // within- and between-plot constant with α = 1 → zero bias
  Matrix c(16, 4, 3.0);
  CHECK(max_abs(vhat_ht_bias(PotentialOutcomeTable(sptest::tiny_design(), c))) < 1e-14);
}

TEST_CASE("enumeration moments on the tiny design") {
  std::mt19937_64 gen(26);
  const PotentialOutcomeTable pot = sptest::random_population(gen, sptest::tiny_design());
  const sptest::EnumerationMoments e = sptest::enumerate_ht_moments(pot);
  CHECK(e.count == 7776);
  const MomentSummary m = true_moments(pot);
  const double scale = std::max(1.0, max_abs(m.mean));
  CHECK(max_abs_diff(e.mean_ht, m.mean) / scale < 1e-12);
  const Matrix cov = true_cov_ht(pot);
  CHECK(max_abs_diff(e.cov_ht, cov) / std::max(1.0, max_abs(cov)) < 1e-12);
  CHECK(max_abs_diff(e.mean_vhat_ht - e.cov_ht, vhat_ht_bias(pot)) / std::max(1.0, max_abs(cov)) < 1e-12);
}
