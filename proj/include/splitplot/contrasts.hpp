#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "splitplot/linalg.hpp"

namespace splitplot {

/// Rows map a treatment-mean vector (lexicographic z order) to estimands.
struct ContrastMatrix {
  Matrix g;
  std::vector<std::string> labels;
};

/// Checks shapes and that every row sums to zero; throws InvalidInput otherwise.
ContrastMatrix make_contrast(Matrix g, std::vector<std::string> labels);

/// Main effects of each non-baseline level of A, then of B, then all A×B
/// interactions, baseline level 0. For 2×2 the rows are labelled A, B, AB;
/// otherwise A1.., B1.., A1:B1...
ContrastMatrix standard_contrasts(std::size_t t_a, std::size_t t_b, bool halve_interaction = false);

/// The sub-matrix made of the given rows.
ContrastMatrix select_rows(const ContrastMatrix& g, std::span<const std::size_t> rows);

struct EffectEstimate {
  Vector estimates;
  Matrix covariance;
  std::vector<std::string> labels;

  /// Square roots of the (clamped nonnegative) diagonal.
  Vector standard_errors() const;
};

/// G·m with covariance G·V·Gᵀ.
EffectEstimate apply_contrast(const ContrastMatrix& g, std::span<const double> means, const Matrix& covariance);

}  // namespace splitplot
