#pragma once

// Split-plot assignment mechanism: W whole-plots, W_a of them get whole-plot
// level a; within plot w, M_wb sub-plots get sub-plot level b. Treatments
// z = (a, b) are indexed lexicographically as z = a * t_b + b.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splitplot/linalg.hpp"

namespace splitplot {

class SplitPlotDesign {
 public:
  SplitPlotDesign(std::size_t t_a, std::size_t t_b, std::vector<std::size_t> whole_plot_counts,
                  std::vector<std::vector<std::size_t>> sub_plot_counts);

  std::size_t t_a() const noexcept { return t_a_; }
  std::size_t t_b() const noexcept { return t_b_; }
  std::size_t num_treatments() const noexcept { return t_a_ * t_b_; }
  std::size_t treatment(std::size_t a, std::size_t b) const;
  /// (a, b) for treatment index z.
  std::pair<std::size_t, std::size_t> levels(std::size_t z) const;

  std::size_t num_plots() const noexcept { return m_w_.size(); }
  std::size_t num_units() const noexcept { return n_; }
  std::size_t whole_plot_count(std::size_t a) const { return w_a_.at(a); }
  const std::vector<std::size_t>& whole_plot_counts() const noexcept { return w_a_; }
  std::size_t plot_size(std::size_t w) const { return m_w_.at(w); }
  std::size_t sub_plot_count(std::size_t w, std::size_t b) const { return m_wb_.at(w).at(b); }
  const std::vector<std::vector<std::size_t>>& sub_plot_counts() const noexcept { return m_wb_; }
  /// Index of the first unit of plot w in the flattened (w, s) order.
  std::size_t unit_offset(std::size_t w) const { return offset_.at(w); }

  double mean_plot_size() const noexcept { return static_cast<double>(n_) / static_cast<double>(num_plots()); }
  /// α_w = M_w / M̄.
  double size_factor(std::size_t w) const { return alpha_.at(w); }
  const Vector& size_factors() const noexcept { return alpha_; }
  double p_a(std::size_t a) const;
  double q_wb(std::size_t w, std::size_t b) const;
  double inclusion_probability(std::size_t w, std::size_t z) const;

  /// Every plot has the same size and the same per-level sub-plot counts.
  bool is_uniform() const noexcept { return uniform_; }

  friend bool operator==(const SplitPlotDesign& x, const SplitPlotDesign& y) {
    return x.t_a_ == y.t_a_ && x.t_b_ == y.t_b_ && x.w_a_ == y.w_a_ && x.m_wb_ == y.m_wb_;
  }

 private:
  std::size_t t_a_;
  std::size_t t_b_;
  std::vector<std::size_t> w_a_;
  std::vector<std::vector<std::size_t>> m_wb_;
  std::vector<std::size_t> m_w_;
  std::vector<std::size_t> offset_;
  std::size_t n_ = 0;
  Vector alpha_;
  bool uniform_ = true;
};

struct Assignment {
  std::vector<std::size_t> a_levels;               // A_w
  std::vector<std::vector<std::size_t>> b_levels;  // B_ws

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Throws InvalidInput unless the assignment has the design's shapes and counts.
void validate_assignment(const SplitPlotDesign& design, const Assignment& assignment);

/// Two-stage complete randomization; stage I uses stream 0 and plot w's
/// stage II uses stream 1 + w of the generator keyed by `seed`.
Assignment randomize(const SplitPlotDesign& design, std::uint64_t seed);

/// One realized experiment. Units are flattened in (w, s) order.
class ObservedData {
 public:
  ObservedData(SplitPlotDesign design, Assignment assignment, Vector outcomes, Matrix covariates = {},
               std::vector<std::string> covariate_names = {});

  const SplitPlotDesign& design() const noexcept { return design_; }
  const Assignment& assignment() const noexcept { return assignment_; }
  const Vector& outcomes() const noexcept { return outcomes_; }
  /// N × J, possibly with zero columns.
  const Matrix& covariates() const noexcept { return covariates_; }
  std::size_t num_covariates() const noexcept { return covariates_.cols(); }
  const std::vector<std::string>& covariate_names() const noexcept { return covariate_names_; }

  std::size_t unit_index(std::size_t w, std::size_t s) const { return design_.unit_offset(w) + s; }
  double outcome(std::size_t w, std::size_t s) const { return outcomes_[unit_index(w, s)]; }
  /// Treatment index of unit (w, s).
  std::size_t treatment(std::size_t w, std::size_t s) const;
  /// Treatment index per flattened unit.
  const std::vector<std::size_t>& unit_treatments() const noexcept { return unit_z_; }
  /// Whole-plot index per flattened unit.
  const std::vector<std::size_t>& unit_plots() const noexcept { return unit_w_; }

  ObservedData with_outcomes(Vector outcomes) const;
  ObservedData with_covariates(Matrix covariates, std::vector<std::string> names) const;

 private:
  SplitPlotDesign design_;
  Assignment assignment_;
  Vector outcomes_;
  Matrix covariates_;
  std::vector<std::string> covariate_names_;
  std::vector<std::size_t> unit_z_;
  std::vector<std::size_t> unit_w_;
};

/// Y_ws(z) for every unit (rows, (w, s) order) and treatment (columns).
class PotentialOutcomeTable {
 public:
  PotentialOutcomeTable(SplitPlotDesign design, Matrix table);

  const SplitPlotDesign& design() const noexcept { return design_; }
  const Matrix& table() const noexcept { return table_; }
  double value(std::size_t w, std::size_t s, std::size_t z) const {
    return table_(design_.unit_offset(w) + s, z);
  }
  /// Ȳ(z).
  double mean(std::size_t z) const;
  /// Ȳ_w(z).
  double plot_mean(std::size_t w, std::size_t z) const;

 private:
  SplitPlotDesign design_;
  Matrix table_;
};

/// Reveals Y_ws = Y_ws(Z_ws) under `assignment`.
ObservedData observe(const PotentialOutcomeTable& pot, const Assignment& assignment, Matrix covariates = {},
                     std::vector<std::string> covariate_names = {});

/// Number of distinct assignments, saturating at UINT64_MAX.
std::uint64_t assignment_space_size(const SplitPlotDesign& design);

/// Visits every assignment exactly once: stage-I split slowest, last plot fastest.
class AssignmentEnumerator {
 public:
  static constexpr std::uint64_t kDefaultCap = 1'000'000;

  /// Throws CapExceeded when the space is larger than `cap`.
  explicit AssignmentEnumerator(const SplitPlotDesign& design, std::uint64_t cap = kDefaultCap);

  std::uint64_t size() const noexcept { return size_; }
  /// Writes the next assignment into `out`; false once exhausted.
  bool next(Assignment& out);
  void reset();

 private:
  SplitPlotDesign design_;
  std::uint64_t size_;
  Assignment current_;
  bool started_ = false;
  bool finished_ = false;
};

}  // namespace splitplot
