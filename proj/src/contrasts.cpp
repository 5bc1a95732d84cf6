#include "splitplot/contrasts.hpp"

#include <algorithm>
#include <cmath>

#include "splitplot/error.hpp"

namespace splitplot {

ContrastMatrix make_contrast(Matrix g, std::vector<std::string> labels) {
  if (labels.size() != g.rows()) throw InvalidInput("contrast: one label per row required");
  if (!g.all_finite()) throw InvalidInput("contrast: non-finite entry");
  for (std::size_t k = 0; k < g.rows(); ++k) {
    double sum = 0.0;
    double scale = 0.0;
    for (double v : g.row(k)) {
      sum += v;
      scale = std::max(scale, std::abs(v));
    }
    if (std::abs(sum) > 1e-12 * std::max(1.0, scale))
      throw InvalidInput("contrast: row '" + labels[k] + "' does not sum to zero");
  }
  return {std::move(g), std::move(labels)};
}

ContrastMatrix standard_contrasts(std::size_t t_a, std::size_t t_b, bool halve_interaction) {
  if (t_a < 2 || t_b < 2) throw InvalidInput("contrasts: both factors need at least 2 levels");
  const std::size_t nt = t_a * t_b;
  const bool two_by_two = t_a == 2 && t_b == 2;
  const std::size_t k = (t_a - 1) + (t_b - 1) + (t_a - 1) * (t_b - 1);
  Matrix g(k, nt);
  std::vector<std::string> labels;
  auto z = [t_b](std::size_t a, std::size_t b) { return a * t_b + b; };
  std::size_t row = 0;

  for (std::size_t a = 1; a < t_a; ++a, ++row) {
    for (std::size_t b = 0; b < t_b; ++b) {
      g(row, z(a, b)) += 1.0 / static_cast<double>(t_b);
      g(row, z(0, b)) -= 1.0 / static_cast<double>(t_b);
    }
    labels.push_back(two_by_two ? "A" : "A" + std::to_string(a));
  }
  for (std::size_t b = 1; b < t_b; ++b, ++row) {
    for (std::size_t a = 0; a < t_a; ++a) {
      g(row, z(a, b)) += 1.0 / static_cast<double>(t_a);
      g(row, z(a, 0)) -= 1.0 / static_cast<double>(t_a);
    }
    labels.push_back(two_by_two ? "B" : "B" + std::to_string(b));
  }
  const double scale = halve_interaction ? 0.5 : 1.0;
  for (std::size_t a = 1; a < t_a; ++a)
    for (std::size_t b = 1; b < t_b; ++b, ++row) {
      g(row, z(a, b)) += scale;
      g(row, z(0, b)) -= scale;
      g(row, z(a, 0)) -= scale;
      g(row, z(0, 0)) += scale;
      labels.push_back(two_by_two ? "AB" : "A" + std::to_string(a) + ":B" + std::to_string(b));
    }
  return make_contrast(std::move(g), std::move(labels));
}

ContrastMatrix select_rows(const ContrastMatrix& g, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), g.g.cols());
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= g.g.rows()) throw InvalidInput("contrast: row index out of range");
    std::copy(g.g.row(rows[k]).begin(), g.g.row(rows[k]).end(), out.row(k).begin());
    labels.push_back(g.labels[rows[k]]);
  }
  return {std::move(out), std::move(labels)};
}

Vector EffectEstimate::standard_errors() const {
  Vector se(estimates.size());
  for (std::size_t k = 0; k < se.size(); ++k) se[k] = std::sqrt(std::max(0.0, covariance(k, k)));
  return se;
}

EffectEstimate apply_contrast(const ContrastMatrix& g, std::span<const double> means, const Matrix& covariance) {
  if (g.g.cols() != means.size() || covariance.rows() != means.size() || covariance.cols() != means.size())
    throw InvalidInput("apply_contrast: dimension mismatch");
  EffectEstimate e;
  e.estimates = g.g * means;
  e.covariance = symmetrize(g.g * covariance * g.g.transpose());
  e.labels = g.labels;
  return e;
}

}  // namespace splitplot
