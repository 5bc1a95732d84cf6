#pragma once

#include <cstddef>
#include <random>

#include "splitplot/design.hpp"

namespace sptest {

using namespace splitplot;

/// 2×2, W = 4 (A = 0,0,1,1), two units per (plot, level).
ObservedData fixture_f1();

/// W = 4, W_0 = W_1 = 2, M_wb = 2: 6 · 6⁴ = 7776 assignments.
SplitPlotDesign tiny_design();

/// Uniformly drawn counts; `uniform` forces identical sub-plot counts.
SplitPlotDesign random_design(std::mt19937_64& gen, std::size_t t_a, std::size_t t_b, std::size_t w_lo,
                              std::size_t w_hi, std::size_t m_lo, std::size_t m_hi, bool uniform = false);

/// Same, redrawn until the design is non-uniform.
SplitPlotDesign random_nonuniform_design(std::mt19937_64& gen, std::size_t t_a, std::size_t t_b);

/// Potential outcomes with plot effects, treatment effects and unit noise.
PotentialOutcomeTable random_population(std::mt19937_64& gen, const SplitPlotDesign& design);

/// Random assignment (from the library), outcomes and two covariates:
/// x1 varies within plots, x2 is constant within plots.
ObservedData random_data(std::mt19937_64& gen, const SplitPlotDesign& design);

}  // namespace sptest
