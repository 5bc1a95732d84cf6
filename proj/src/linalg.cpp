#include "splitplot/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "splitplot/error.hpp"

namespace splitplot {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kGeninvTol = 1e-12;
constexpr double kSymmetryTol = 1e-10;

void require(bool ok, const char* what) {
  if (!ok) throw InvalidInput(what);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require_symmetric(const Matrix& m, const char* what) {
  require(m.rows() == m.cols(), what);
  require(m.all_finite(), "matrix has non-finite entries");
  const double tol = kSymmetryTol * std::max(1.0, max_abs(m));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol) throw InvalidInput(std::string(what) + ": not symmetric");
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) throw InvalidInput("matrix entries do not match rows x cols");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidInput("ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  require(r0 + nr <= rows_ && c0 + nc <= cols_, "block out of range");
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

bool Matrix::all_finite() const { return splitplot::all_finite(data_); }

Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matrix product: dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> v) {
  require(a.cols() == v.size(), "matrix-vector product: dimension mismatch");
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), v);
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix sum: dimension mismatch");
  std::vector<double> e(a.entries());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += b.entries()[i];
  return Matrix(a.rows(), a.cols(), std::move(e));
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix difference: dimension mismatch");
  std::vector<double> e(a.entries());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] -= b.entries()[i];
  return Matrix(a.rows(), a.cols(), std::move(e));
}

Matrix operator*(double s, const Matrix& a) {
  std::vector<double> e(a.entries());
  for (double& x : e) x *= s;
  return Matrix(a.rows(), a.cols(), std::move(e));
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard: dimension mismatch");
  std::vector<double> e(a.entries());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] *= b.entries()[i];
  return Matrix(a.rows(), a.cols(), std::move(e));
}

Matrix symmetrize(const Matrix& a) {
  require(a.rows() == a.cols(), "symmetrize: matrix not square");
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

Matrix outer(std::span<const double> u, std::span<const double> v) {
  Matrix m(u.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
  return m;
}

double dot(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), "dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_abs(const Matrix& a) { return max_abs(std::span<const double>(a.entries())); }

double max_abs_diff(std::span<const double> u, std::span<const double> v) {
  require(u.size() == v.size(), "max_abs_diff: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "max_abs_diff: dimension mismatch");
  return max_abs_diff(std::span<const double>(a.entries()), std::span<const double>(b.entries()));
}

LsSolution wls_solve(const Matrix& x, std::span<const double> y, std::span<const double> w,
                     std::size_t priority_cols) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  require(n >= 1, "wls_solve: no observations");
  require(y.size() == n && w.size() == n, "wls_solve: dimension mismatch");
  require(priority_cols <= p, "wls_solve: priority columns exceed column count");
  require(x.all_finite() && all_finite(y), "wls_solve: non-finite input");
  for (double wi : w)
    if (!(wi > 0.0) || !std::isfinite(wi)) throw InvalidInput("wls_solve: weights must be positive and finite");

  // Column-major working copy of √w·X and √w·y.
  std::vector<double> a(n * p);
  Vector b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sw = std::sqrt(w[i]);
    b[i] = sw * y[i];
    for (std::size_t c = 0; c < p; ++c) a[c * n + i] = sw * x(i, c);
  }

  Matrix r(p, p);
  std::vector<std::size_t> order;
  order.reserve(p);
  std::vector<char> done(p, 0);
  std::vector<std::size_t> dropped;
  Vector hv(n);
  std::vector<Vector> reflectors;
  std::vector<double> betas;
  double max_pivot = 0.0;
  std::size_t k = 0;

  auto run_phase = [&](std::size_t lo, std::size_t hi) {
    while (true) {
      std::size_t best = p;
      double best_norm = -1.0;
      for (std::size_t c = lo; c < hi; ++c) {
        if (done[c]) continue;
        double ss = 0.0;
        const double* col = &a[c * n];
        for (std::size_t i = k; i < n; ++i) ss += col[i] * col[i];
        const double nrm = std::sqrt(ss);
        if (nrm > best_norm) {
          best_norm = nrm;
          best = c;
        }
      }
      if (best == p) return;
      const double scale = std::max(max_pivot, best_norm);
      if (k == n || best_norm == 0.0 || best_norm <= kRankTol * scale) {
        for (std::size_t c = lo; c < hi; ++c)
          if (!done[c]) {
            done[c] = 1;
            dropped.push_back(c);
          }
        return;
      }

      double* col = &a[best * n];
      const double alpha = col[k] >= 0.0 ? -best_norm : best_norm;
      const std::size_t m = n - k;
      hv[0] = col[k] - alpha;
      for (std::size_t i = 1; i < m; ++i) hv[i] = col[k + i];
      const double vtv = best_norm * best_norm - col[k] * col[k] + hv[0] * hv[0];
      const double beta = vtv > 0.0 ? 2.0 / vtv : 0.0;

      auto reflect = [&](double* target) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += hv[i] * target[k + i];
        s *= beta;
        for (std::size_t i = 0; i < m; ++i) target[k + i] -= s * hv[i];
      };
      for (std::size_t c = 0; c < p; ++c)
        if (!done[c] && c != best) reflect(&a[c * n]);
      reflect(b.data());
      reflectors.emplace_back(hv.begin(), hv.begin() + static_cast<std::ptrdiff_t>(m));
      betas.push_back(beta);

      col[k] = alpha;
      for (std::size_t i = k + 1; i < n; ++i) col[i] = 0.0;
      for (std::size_t c = 0; c < p; ++c)
        if (!done[c]) r(k, c) = a[c * n + k];

      done[best] = 1;
      order.push_back(best);
      max_pivot = std::max(max_pivot, std::abs(alpha));
      ++k;
    }
  };
  run_phase(0, priority_cols);
  run_phase(priority_cols, p);

  const std::size_t rank = order.size();
  LsSolution sol;
  sol.rank = rank;
  sol.coefficients.assign(p, 0.0);
  for (std::size_t i = rank; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < rank; ++j) s -= r(i, order[j]) * sol.coefficients[order[j]];
    sol.coefficients[order[i]] = s / r(i, order[i]);
  }

  // Inverse of the retained upper-triangular factor, then (RᵀR)⁻¹ = R⁻¹R⁻ᵀ.
  Matrix rinv(rank, rank);
  for (std::size_t j = 0; j < rank; ++j) {
    rinv(j, j) = 1.0 / r(j, order[j]);
    for (std::size_t i = j; i-- > 0;) {
      double s = 0.0;
      for (std::size_t l = i + 1; l <= j; ++l) s += r(i, order[l]) * rinv(l, j);
      rinv(i, j) = -s / r(i, order[i]);
    }
  }
  sol.gram_inverse = Matrix(p, p);
  for (std::size_t i = 0; i < rank; ++i)
    for (std::size_t j = 0; j < rank; ++j) {
      double s = 0.0;
      for (std::size_t l = std::max(i, j); l < rank; ++l) s += rinv(i, l) * rinv(j, l);
      sol.gram_inverse(order[i], order[j]) = s;
    }

  // Thin Q from the stored reflectors, applied last to first.
  sol.q = Matrix(n, rank);
  Vector e(n);
  for (std::size_t j = 0; j < rank; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    for (std::size_t h = rank; h-- > 0;) {
      const Vector& v = reflectors[h];
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * e[h + i];
      s *= betas[h];
      for (std::size_t i = 0; i < v.size(); ++i) e[h + i] -= s * v[i];
    }
    for (std::size_t i = 0; i < n; ++i) sol.q(i, j) = e[i];
  }
  sol.r_inverse = std::move(rinv);
  sol.order = order;

  sol.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.residuals[i] = y[i] - dot(x.row(i), sol.coefficients);
  std::sort(dropped.begin(), dropped.end());
  sol.dropped_columns = std::move(dropped);
  return sol;
}

Matrix sandwich(const Matrix& bread_inv, const Matrix& meat) {
  require(bread_inv.rows() == bread_inv.cols() && meat.rows() == meat.cols() &&
              bread_inv.cols() == meat.rows(),
          "sandwich: dimension mismatch");
  return symmetrize(bread_inv * meat * bread_inv);
}

SymmetricEigen symmetric_eigen(const Matrix& m) {
  require_symmetric(m, "symmetric_eigen");
  const std::size_t n = m.rows();
  Matrix a = symmetrize(m);
  Matrix v = Matrix::identity(n);

  double fro = 0.0;
  for (double x : a.entries()) fro += x * x;
  fro = std::sqrt(fro);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * fro || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < std::numeric_limits<double>::min()) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(idx[k], idx[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, idx[k]);
  }
  return out;
}

double quadform_geninv(const Matrix& m, std::span<const double> v) {
  require_symmetric(m, "quadform_geninv");
  require(v.size() == m.rows(), "quadform_geninv: dimension mismatch");
  require(all_finite(v), "quadform_geninv: non-finite vector");
  if (m.rows() == 0) return 0.0;
  const SymmetricEigen eig = symmetric_eigen(m);
  const double top = eig.values.back();
  if (!(top > 0.0)) return 0.0;
  double q = 0.0;
  for (std::size_t k = 0; k < eig.values.size(); ++k) {
    const double lambda = eig.values[k];
    if (lambda <= kGeninvTol * top) continue;
    double proj = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) proj += eig.vectors(i, k) * v[i];
    q += proj * proj / lambda;
  }
  return std::max(q, 0.0);
}

Matrix psd_inverse_sqrt(const Matrix& m, double rel_tol) {
  const SymmetricEigen eig = symmetric_eigen(m);
  const std::size_t n = m.rows();
  Matrix out(n, n);
  if (n == 0) return out;
  const double top = eig.values.back();
  for (std::size_t k = 0; k < n; ++k) {
    const double lambda = eig.values[k];
    if (!(top > 0.0) || lambda <= rel_tol * top) continue;
    const double f = 1.0 / std::sqrt(lambda);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += f * eig.vectors(i, k) * eig.vectors(j, k);
  }
  return out;
}

}  // namespace splitplot
