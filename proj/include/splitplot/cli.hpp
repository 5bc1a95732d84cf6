#pragma once

// File formats and command implementations behind the `splitplot` tool.

#include <iosfwd>
#include <string>
#include <vector>

#include "splitplot/design.hpp"
#include "splitplot/montecarlo.hpp"

namespace splitplot::cli {

/// Reserved dataset columns; every other column is a candidate covariate.
inline constexpr const char* kWholePlot = "whole_plot";
inline constexpr const char* kUnit = "unit";
inline constexpr const char* kALevel = "a_level";
inline constexpr const char* kBLevel = "b_level";
inline constexpr const char* kOutcome = "outcome";

struct Dataset {
  ObservedData data;
  std::vector<std::string> plot_ids;  // in whole-plot index order (first appearance)
};

/// Parses a dataset CSV and infers the design from the realized counts.
/// Schema problems raise InvalidInput naming the offending line.
Dataset read_dataset(std::istream& in, const std::string& source = "<input>");
Dataset load_dataset(const std::string& path);

/// {"t_a": 2, "t_b": 2, "whole_plot_counts": [W_0, W_1], "sub_plot_counts": [[M_w0, M_w1], ...]}
SplitPlotDesign parse_design_json(const std::string& text);
SplitPlotDesign load_design(const std::string& path);

/// Simulation settings from JSON; absent keys keep their defaults.
SimConfig parse_sim_config_json(const std::string& text, SimConfig base = {});

void write_assignment_csv(std::ostream& out, const SplitPlotDesign& design, const Assignment& x);
void write_sim_summary_csv(std::ostream& out, const SimSummary& summary);

/// 12 significant digits; NaN prints as NA.
std::string format_number(double v);

/// Runs the tool; returns the process exit code (0 ok, 2 invalid input, 1 internal error).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace splitplot::cli
