#include "splitplot/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "splitplot/error.hpp"
#include "splitplot/rng.hpp"

namespace splitplot {

namespace {

std::string num(std::size_t v) { return std::to_string(v); }

std::uint64_t sat_mul(std::uint64_t x, std::uint64_t y) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (x != 0 && y > kMax / x) return kMax;
  return x * y;
}

// n! / Π k_i!, as a product of binomials, saturating.
std::uint64_t multinomial(const std::vector<std::size_t>& parts) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 1;
  std::size_t n = 0;
  for (std::size_t k : parts) {
    // C(n + k, k) built incrementally. c·(n+i)/i is an integer and, with
    // g = gcd(c, i), i/g divides n+i, so no intermediate overflows.
    std::uint64_t c = 1;
    for (std::size_t i = 1; i <= k; ++i) {
      const std::uint64_t g = std::gcd(c, static_cast<std::uint64_t>(i));
      c = sat_mul(c / g, (n + i) / (i / g));
      if (c == kMax) return kMax;
    }
    n += k;
    total = sat_mul(total, c);
  }
  return total;
}

std::vector<std::size_t> sorted_levels(const std::vector<std::size_t>& counts) {
  std::vector<std::size_t> out;
  for (std::size_t level = 0; level < counts.size(); ++level) out.insert(out.end(), counts[level], level);
  return out;
}

}  // namespace

SplitPlotDesign::SplitPlotDesign(std::size_t t_a, std::size_t t_b, std::vector<std::size_t> whole_plot_counts,
                                 std::vector<std::vector<std::size_t>> sub_plot_counts)
    : t_a_(t_a), t_b_(t_b), w_a_(std::move(whole_plot_counts)), m_wb_(std::move(sub_plot_counts)) {
  if (t_a_ < 2 || t_b_ < 2) throw InvalidInput("design: both factors need at least 2 levels");
  if (w_a_.size() != t_a_) throw InvalidInput("design: need one whole-plot count per level of A");
  std::size_t w_total = 0;
  for (std::size_t a = 0; a < t_a_; ++a) {
    if (w_a_[a] < 2) throw InvalidInput("design: W_" + num(a) + " = " + num(w_a_[a]) + " < 2");
    w_total += w_a_[a];
  }
  if (m_wb_.size() != w_total)
    throw InvalidInput("design: " + num(m_wb_.size()) + " rows of sub-plot counts for " + num(w_total) +
                       " whole-plots");
  m_w_.resize(w_total);
  offset_.resize(w_total);
  for (std::size_t w = 0; w < w_total; ++w) {
    if (m_wb_[w].size() != t_b_) throw InvalidInput("design: plot " + num(w) + " needs one count per level of B");
    std::size_t m = 0;
    for (std::size_t b = 0; b < t_b_; ++b) {
      if (m_wb_[w][b] < 2)
        throw InvalidInput("design: M_wb = " + num(m_wb_[w][b]) + " < 2 for plot " + num(w) + ", level " + num(b));
      m += m_wb_[w][b];
    }
    offset_[w] = n_;
    m_w_[w] = m;
    n_ += m;
    if (m_wb_[w] != m_wb_[0]) uniform_ = false;
  }
  alpha_.resize(w_total);
  const double mbar = mean_plot_size();
  for (std::size_t w = 0; w < w_total; ++w) alpha_[w] = static_cast<double>(m_w_[w]) / mbar;
}

std::size_t SplitPlotDesign::treatment(std::size_t a, std::size_t b) const {
  if (a >= t_a_ || b >= t_b_) throw InvalidInput("treatment levels out of range");
  return a * t_b_ + b;
}

std::pair<std::size_t, std::size_t> SplitPlotDesign::levels(std::size_t z) const {
  if (z >= num_treatments()) throw InvalidInput("treatment index out of range");
  return {z / t_b_, z % t_b_};
}

double SplitPlotDesign::p_a(std::size_t a) const {
  return static_cast<double>(w_a_.at(a)) / static_cast<double>(num_plots());
}

double SplitPlotDesign::q_wb(std::size_t w, std::size_t b) const {
  return static_cast<double>(m_wb_.at(w).at(b)) / static_cast<double>(m_w_.at(w));
}

double SplitPlotDesign::inclusion_probability(std::size_t w, std::size_t z) const {
  if (w >= num_plots()) throw InvalidInput("whole-plot index out of range");
  const auto [a, b] = levels(z);
  return p_a(a) * q_wb(w, b);
}

void validate_assignment(const SplitPlotDesign& design, const Assignment& x) {
  const std::size_t w_total = design.num_plots();
  if (x.a_levels.size() != w_total || x.b_levels.size() != w_total)
    throw InvalidInput("assignment: wrong number of whole-plots");
  std::vector<std::size_t> a_counts(design.t_a(), 0);
  for (std::size_t a : x.a_levels) {
    if (a >= design.t_a()) throw InvalidInput("assignment: whole-plot level out of range");
    ++a_counts[a];
  }
  if (a_counts != design.whole_plot_counts()) throw InvalidInput("assignment: whole-plot level counts differ from W_a");
  for (std::size_t w = 0; w < w_total; ++w) {
    if (x.b_levels[w].size() != design.plot_size(w))
      throw InvalidInput("assignment: plot " + num(w) + " has the wrong number of sub-plots");
    std::vector<std::size_t> b_counts(design.t_b(), 0);
    for (std::size_t b : x.b_levels[w]) {
      if (b >= design.t_b()) throw InvalidInput("assignment: sub-plot level out of range");
      ++b_counts[b];
    }
    if (b_counts != design.sub_plot_counts()[w])
      throw InvalidInput("assignment: plot " + num(w) + " sub-plot level counts differ from M_wb");
  }
}

Assignment randomize(const SplitPlotDesign& design, std::uint64_t seed) {
  Assignment x;
  x.a_levels = sorted_levels(design.whole_plot_counts());
  Rng(seed, 0).shuffle(std::span<std::size_t>(x.a_levels));
  x.b_levels.resize(design.num_plots());
  for (std::size_t w = 0; w < design.num_plots(); ++w) {
    x.b_levels[w] = sorted_levels(design.sub_plot_counts()[w]);
    Rng(seed, 1 + w).shuffle(std::span<std::size_t>(x.b_levels[w]));
  }
  return x;
}

ObservedData::ObservedData(SplitPlotDesign design, Assignment assignment, Vector outcomes, Matrix covariates,
                           std::vector<std::string> covariate_names)
    : design_(std::move(design)),
      assignment_(std::move(assignment)),
      outcomes_(std::move(outcomes)),
      covariates_(std::move(covariates)),
      covariate_names_(std::move(covariate_names)) {
  validate_assignment(design_, assignment_);
  const std::size_t n = design_.num_units();
  if (outcomes_.size() != n) throw InvalidInput("observed data: outcome count differs from N");
  for (double y : outcomes_)
    if (!std::isfinite(y)) throw InvalidInput("observed data: non-finite outcome");
  if (covariates_.rows() == 0 && covariates_.cols() == 0) covariates_ = Matrix(n, 0);
  if (covariates_.rows() != n) throw InvalidInput("observed data: covariate rows differ from N");
  if (!covariates_.all_finite()) throw InvalidInput("observed data: non-finite covariate");
  if (covariate_names_.empty())
    for (std::size_t j = 0; j < covariates_.cols(); ++j) covariate_names_.push_back("x" + num(j + 1));
  if (covariate_names_.size() != covariates_.cols())
    throw InvalidInput("observed data: covariate names differ from covariate columns");

  unit_z_.resize(n);
  unit_w_.resize(n);
  for (std::size_t w = 0; w < design_.num_plots(); ++w)
    for (std::size_t s = 0; s < design_.plot_size(w); ++s) {
      const std::size_t i = design_.unit_offset(w) + s;
      unit_w_[i] = w;
      unit_z_[i] = design_.treatment(assignment_.a_levels[w], assignment_.b_levels[w][s]);
    }
}

std::size_t ObservedData::treatment(std::size_t w, std::size_t s) const { return unit_z_.at(unit_index(w, s)); }

ObservedData ObservedData::with_outcomes(Vector outcomes) const {
  return ObservedData(design_, assignment_, std::move(outcomes), covariates_, covariate_names_);
}

ObservedData ObservedData::with_covariates(Matrix covariates, std::vector<std::string> names) const {
  return ObservedData(design_, assignment_, outcomes_, std::move(covariates), std::move(names));
}

PotentialOutcomeTable::PotentialOutcomeTable(SplitPlotDesign design, Matrix table)
    : design_(std::move(design)), table_(std::move(table)) {
  if (table_.rows() != design_.num_units() || table_.cols() != design_.num_treatments())
    throw InvalidInput("potential outcomes: table must be N x |T|");
  if (!table_.all_finite()) throw InvalidInput("potential outcomes: non-finite entry");
}

double PotentialOutcomeTable::mean(std::size_t z) const {
  double s = 0.0;
  for (std::size_t i = 0; i < table_.rows(); ++i) s += table_(i, z);
  return s / static_cast<double>(table_.rows());
}

double PotentialOutcomeTable::plot_mean(std::size_t w, std::size_t z) const {
  const std::size_t m = design_.plot_size(w);
  double s = 0.0;
  for (std::size_t k = 0; k < m; ++k) s += value(w, k, z);
  return s / static_cast<double>(m);
}

ObservedData observe(const PotentialOutcomeTable& pot, const Assignment& assignment, Matrix covariates,
                     std::vector<std::string> covariate_names) {
  const SplitPlotDesign& d = pot.design();
  validate_assignment(d, assignment);
  Vector y(d.num_units());
  for (std::size_t w = 0; w < d.num_plots(); ++w)
    for (std::size_t s = 0; s < d.plot_size(w); ++s)
      y[d.unit_offset(w) + s] = pot.value(w, s, d.treatment(assignment.a_levels[w], assignment.b_levels[w][s]));
  return ObservedData(d, assignment, std::move(y), std::move(covariates), std::move(covariate_names));
}

std::uint64_t assignment_space_size(const SplitPlotDesign& design) {
  std::uint64_t total = multinomial(design.whole_plot_counts());
  for (const auto& counts : design.sub_plot_counts()) total = sat_mul(total, multinomial(counts));
  return total;
}

AssignmentEnumerator::AssignmentEnumerator(const SplitPlotDesign& design, std::uint64_t cap)
    : design_(design), size_(assignment_space_size(design)) {
  if (size_ > cap)
    throw CapExceeded("assignment space has " +
                      (size_ == std::numeric_limits<std::uint64_t>::max() ? std::string("more than 2^64")
                                                                          : std::to_string(size_)) +
                      " elements, above the cap of " + std::to_string(cap));
  reset();
}

void AssignmentEnumerator::reset() {
  current_.a_levels = sorted_levels(design_.whole_plot_counts());
  current_.b_levels.resize(design_.num_plots());
  for (std::size_t w = 0; w < design_.num_plots(); ++w) current_.b_levels[w] = sorted_levels(design_.sub_plot_counts()[w]);
  started_ = false;
  finished_ = false;
}

bool AssignmentEnumerator::next(Assignment& out) {
  if (finished_) return false;
  if (started_) {
    // Odometer: next_permutation wraps to sorted order when it returns false.
    bool carried = true;
    for (std::size_t w = design_.num_plots(); carried && w-- > 0;)
      carried = !std::next_permutation(current_.b_levels[w].begin(), current_.b_levels[w].end());
    if (carried && !std::next_permutation(current_.a_levels.begin(), current_.a_levels.end())) {
      finished_ = true;
      return false;
    }
  }
  started_ = true;
  out = current_;
  return true;
}

}  // namespace splitplot
