#include "oracles.hpp"

#include <cmath>
#include <utility>

#include "splitplot/estimators.hpp"

namespace sptest {

void Neumaier::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    comp_ += (sum_ - t) + v;
  } else {
    comp_ += (v - t) + sum_;
  }
  sum_ = t;
}

Vector direct_solve(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

Vector normal_equations_solve(const Matrix& x, std::span<const double> y, std::span<const double> w) {
  const std::size_t p = x.cols();
  Matrix xtx(p, p);
  Vector xty(p, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < p; ++j) {
      xty[j] += w[i] * x(i, j) * y[i];
      for (std::size_t k = 0; k < p; ++k) xtx(j, k) += w[i] * x(i, j) * x(i, k);
    }
  return direct_solve(xtx, xty);
}

Matrix naive_triple(const Matrix& a, const Matrix& b, const Matrix& c) {
  Matrix out(a.rows(), c.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t l = 0; l < c.cols(); ++l) {
      double s = 0.0;
      for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t k = 0; k < b.cols(); ++k) s += a(i, j) * b(j, k) * c(k, l);
      out(i, l) = s;
    }
  return out;
}

EnumerationMoments enumerate_ht_moments(const PotentialOutcomeTable& pot) {
  const SplitPlotDesign& d = pot.design();
  const std::size_t nt = d.num_treatments();
  EnumerationMoments out;
  Assignment x;

  // Pass 1: means of Ŷ_ht and V̂_ht.
  std::vector<Neumaier> sm(nt), sv(nt * nt);
  AssignmentEnumerator it(d);
  while (it.next(x)) {
    const MeanEstimate m = estimate_means(observe(pot, x), MeanScheme::ht);
    for (std::size_t z = 0; z < nt; ++z) {
      sm[z].add(m.means[z]);
      for (std::size_t z2 = 0; z2 < nt; ++z2) sv[z * nt + z2].add(m.covariance(z, z2));
    }
    ++out.count;
  }
  const double n = static_cast<double>(out.count);
  out.mean_ht.resize(nt);
  out.mean_vhat_ht = Matrix(nt, nt);
  for (std::size_t z = 0; z < nt; ++z) {
    out.mean_ht[z] = sm[z].value() / n;
    for (std::size_t z2 = 0; z2 < nt; ++z2) out.mean_vhat_ht(z, z2) = sv[z * nt + z2].value() / n;
  }

  // Pass 2: centred second moments.
  std::vector<Neumaier> sc(nt * nt);
  it.reset();
  while (it.next(x)) {
    const Vector m = estimate_means(observe(pot, x), MeanScheme::ht).means;
    for (std::size_t z = 0; z < nt; ++z)
      for (std::size_t z2 = 0; z2 < nt; ++z2) sc[z * nt + z2].add((m[z] - out.mean_ht[z]) * (m[z2] - out.mean_ht[z2]));
  }
  out.cov_ht = Matrix(nt, nt);
  for (std::size_t z = 0; z < nt; ++z)
    for (std::size_t z2 = 0; z2 < nt; ++z2) out.cov_ht(z, z2) = sc[z * nt + z2].value() / n;
  return out;
}

}  // namespace sptest
