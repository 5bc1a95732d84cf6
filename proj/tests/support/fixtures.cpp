#include "fixtures.hpp"

namespace sptest {

ObservedData fixture_f1() {
  SplitPlotDesign d(2, 2, {2, 2}, {{2, 2}, {2, 2}, {2, 2}, {2, 2}});
  Assignment x{{0, 0, 1, 1}, {{0, 0, 1, 1}, {0, 1, 0, 1}, {1, 1, 0, 0}, {0, 1, 0, 1}}};
  Vector y{1, 3, 2, 4, 2, 6, 4, 8, 3, 5, 1, 3, 0, 2, 4, 6};
  return ObservedData(d, x, y);
}

SplitPlotDesign tiny_design() { return SplitPlotDesign(2, 2, {2, 2}, {{2, 2}, {2, 2}, {2, 2}, {2, 2}}); }

SplitPlotDesign random_design(std::mt19937_64& gen, std::size_t t_a, std::size_t t_b, std::size_t w_lo,
                              std::size_t w_hi, std::size_t m_lo, std::size_t m_hi, bool uniform) {
  std::uniform_int_distribution<std::size_t> wdist(w_lo, w_hi);
  std::uniform_int_distribution<std::size_t> mdist(m_lo, m_hi);
  std::vector<std::size_t> w_a(t_a);
  std::size_t w = 0;
  for (auto& v : w_a) w += (v = wdist(gen));
  std::vector<std::vector<std::size_t>> m(w, std::vector<std::size_t>(t_b));
  for (auto& row : m)
    for (auto& v : row) v = mdist(gen);
  if (uniform)
    for (auto& row : m) row = m[0];
  return SplitPlotDesign(t_a, t_b, w_a, m);
}

SplitPlotDesign random_nonuniform_design(std::mt19937_64& gen, std::size_t t_a, std::size_t t_b) {
  for (;;) {
    SplitPlotDesign d = random_design(gen, t_a, t_b, 2, 6, 2, 6);
    if (!d.is_uniform()) return d;
  }
}

PotentialOutcomeTable random_population(std::mt19937_64& gen, const SplitPlotDesign& d) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const std::size_t nt = d.num_treatments();
  Vector effect(nt);
  for (auto& e : effect) e = 2.0 * nd(gen);
  Matrix table(d.num_units(), nt);
  for (std::size_t w = 0; w < d.num_plots(); ++w) {
    const double plot = nd(gen) + 0.3 * static_cast<double>(d.plot_size(w));
    Vector plot_z(nt);
    for (auto& v : plot_z) v = 0.5 * nd(gen);
    for (std::size_t s = 0; s < d.plot_size(w); ++s) {
      const double unit = nd(gen);
      for (std::size_t z = 0; z < nt; ++z)
        table(d.unit_offset(w) + s, z) = effect[z] + plot + plot_z[z] + unit + 0.5 * nd(gen);
    }
  }
  return PotentialOutcomeTable(d, std::move(table));
}

ObservedData random_data(std::mt19937_64& gen, const SplitPlotDesign& d) {
  const PotentialOutcomeTable pot = random_population(gen, d);
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix x(d.num_units(), 2);
  for (std::size_t w = 0; w < d.num_plots(); ++w) {
    const double xw = nd(gen);
    for (std::size_t s = 0; s < d.plot_size(w); ++s) {
      x(d.unit_offset(w) + s, 0) = nd(gen) + 0.5 * xw;
      x(d.unit_offset(w) + s, 1) = xw;
    }
  }
  const Assignment a = randomize(d, gen());
  // Make outcomes depend on the covariates so adjustment matters.
  ObservedData base = observe(pot, a, x, {"x1", "x2"});
  Vector y = base.outcomes();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.8 * x(i, 0) - 0.6 * x(i, 1);
  return base.with_outcomes(std::move(y));
}

}  // namespace sptest
