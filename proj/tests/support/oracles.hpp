#pragma once

// Independent reference computations used only by tests.

#include <cstdint>
#include <span>

#include "splitplot/design.hpp"
#include "splitplot/linalg.hpp"

namespace sptest {

using namespace splitplot;

/// Compensated (Neumaier) summation.
class Neumaier {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Gaussian elimination with partial pivoting.
Vector direct_solve(Matrix a, Vector b);

/// Solves XᵀWX β = XᵀWy by forming the normal equations.
Vector normal_equations_solve(const Matrix& x, std::span<const double> y, std::span<const double> w);

/// A·B·C by explicit loops.
Matrix naive_triple(const Matrix& a, const Matrix& b, const Matrix& c);

struct EnumerationMoments {
  std::uint64_t count = 0;
  Vector mean_ht;       // average of Ŷ_ht over all assignments
  Matrix cov_ht;        // randomization covariance of Ŷ_ht
  Matrix mean_vhat_ht;  // average of V̂_ht
};

/// Exact moments of the HT estimator by visiting every assignment.
EnumerationMoments enumerate_ht_moments(const PotentialOutcomeTable& pot);

}  // namespace sptest
