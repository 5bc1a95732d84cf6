#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "splitplot/error.hpp"
#include "splitplot/linalg.hpp"
#include "splitplot/rng.hpp"

using namespace splitplot;

namespace {

Matrix random_matrix(std::mt19937_64& gen, std::size_t r, std::size_t c) {
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = nd(gen);
  return m;
}

double rel(double err, double scale) { return err / std::max(1.0, scale); }

}  // namespace

TEST_CASE("intercept-only fit returns the mean") {
  const Matrix x(3, 1, 1.0);
  const LsSolution s = wls_solve(x, Vector{1, 2, 3}, Vector{1, 1, 1});
  CHECK(s.coefficients[0] == doctest::Approx(2.0));
  CHECK(s.rank == 1);
}

TEST_CASE("square full-rank fit interpolates") {
  const LsSolution s = wls_solve(Matrix::identity(2), Vector{5, 7}, Vector{0.3, 9});
  CHECK(s.coefficients[0] == doctest::Approx(5.0));
  CHECK(s.coefficients[1] == doctest::Approx(7.0));
  CHECK(max_abs(s.residuals) < 1e-12);
}

TEST_CASE("least squares agrees with the normal equations") {
  std::mt19937_64 gen(11);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix x = random_matrix(gen, 50, 4);
    Vector y(50), w(50, 1.0);
    std::normal_distribution<double> nd;
    for (auto& v : y) v = nd(gen);
    const Vector ref = sptest::normal_equations_solve(x, y, w);
    const LsSolution s = wls_solve(x, y, w);
    CHECK(rel(max_abs_diff(s.coefficients, ref), max_abs(ref)) < 1e-9);
    // weighted version
    std::uniform_real_distribution<double> ud(0.2, 3.0);
    for (auto& v : w) v = ud(gen);
    const Vector ref_w = sptest::normal_equations_solve(x, y, w);
    CHECK(rel(max_abs_diff(wls_solve(x, y, w).coefficients, ref_w), max_abs(ref_w)) < 1e-9);
  }
}

TEST_CASE("weighted residuals are orthogonal to the columns") {
  std::mt19937_64 gen(12);
  const Matrix x = random_matrix(gen, 30, 3);
  Vector y(30), w(30);
  std::uniform_real_distribution<double> ud(0.5, 2.0);
  for (std::size_t i = 0; i < 30; ++i) {
    y[i] = ud(gen) * 3;
    w[i] = ud(gen);
  }
  const LsSolution s = wls_solve(x, y, w);
  for (std::size_t j = 0; j < 3; ++j) {
    double g = 0;
    for (std::size_t i = 0; i < 30; ++i) g += w[i] * x(i, j) * s.residuals[i];
    CHECK(std::abs(g) < 1e-10);
  }
}

TEST_CASE("collinear columns are dropped, priority columns kept") {
  Matrix x(6, 3);
  for (std::size_t i = 0; i < 6; ++i) {
    x(i, 0) = i < 3 ? 1.0 : 0.0;
    x(i, 1) = i < 3 ? 0.0 : 1.0;
    x(i, 2) = 1.0;  // = col0 + col1
  }
  const Vector y{1, 2, 3, 4, 5, 6};
  const LsSolution s = wls_solve(x, y, Vector(6, 1.0), 2);
  CHECK(s.rank == 2);
  REQUIRE(s.dropped_columns.size() == 1);
  CHECK(s.dropped_columns[0] == 2);
  CHECK(s.coefficients[0] == doctest::Approx(2.0));
  CHECK(s.coefficients[1] == doctest::Approx(5.0));
  CHECK(s.coefficients[2] == 0.0);
  CHECK(s.gram_inverse(2, 2) == 0.0);
}

TEST_CASE("sandwich products") {
  const Matrix m{{2, 1}, {1, 3}};
  CHECK(sandwich(Matrix::identity(2), m) == m);
  const Matrix d = sandwich(Matrix{{2, 0}, {0, 3}}, Matrix::identity(2));
  CHECK(d(0, 0) == 4.0);
  CHECK(d(1, 1) == 9.0);
  CHECK(d(0, 1) == 0.0);

  std::mt19937_64 gen(13);
  for (int rep = 0; rep < 5; ++rep) {
    const Matrix a = symmetrize(random_matrix(gen, 4, 4));
    const Matrix b = symmetrize(random_matrix(gen, 4, 4));
    CHECK(max_abs_diff(sandwich(a, b), sptest::naive_triple(a, b, a)) < 1e-12);
  }
}

TEST_CASE("generalized-inverse quadratic form") {
  CHECK(quadform_geninv(Matrix::identity(3), Vector{1, 2, 2}) == doctest::Approx(9.0));
  CHECK(quadform_geninv(Matrix{{4, 0}, {0, 0}}, Vector{2, 0}) == doctest::Approx(1.0));

  std::mt19937_64 gen(14);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix a = random_matrix(gen, 5, 5);
    const Matrix m = a * a.transpose();
    Vector v(5);
    std::normal_distribution<double> nd;
    for (auto& x : v) x = nd(gen);
    const double ref = dot(v, sptest::direct_solve(m, v));
    CHECK(std::abs(quadform_geninv(m, v) - ref) / std::abs(ref) < 1e-9);
  }
  CHECK_THROWS_AS(quadform_geninv(Matrix{{1, 2}, {0, 1}}, Vector{1, 1}), InvalidInput);
}

TEST_CASE("eigen decomposition reconstructs the matrix") {
  std::mt19937_64 gen(15);
  const Matrix m = symmetrize(random_matrix(gen, 6, 6));
  const SymmetricEigen e = symmetric_eigen(m);
  const Matrix back = e.vectors * Matrix::diagonal(e.values) * e.vectors.transpose();
  CHECK(max_abs_diff(back, m) < 1e-12);
  for (std::size_t k = 1; k < 6; ++k) CHECK(e.values[k - 1] <= e.values[k]);
}

TEST_CASE("inverse square root") {
  std::mt19937_64 gen(16);
  const Matrix a = random_matrix(gen, 4, 4);
  const Matrix m = a * a.transpose() + Matrix::identity(4);
  const Matrix r = psd_inverse_sqrt(m);
  CHECK(max_abs_diff(r * m * r, Matrix::identity(4)) < 1e-10);
}

TEST_CASE("dimension mismatches throw") {
  CHECK_THROWS_AS(Matrix(2, 3) * Matrix(2, 3), InvalidInput);
  CHECK_THROWS_AS(wls_solve(Matrix(3, 1, 1.0), Vector{1, 2}, Vector{1, 1, 1}), InvalidInput);
}

TEST_CASE("philox known answer and stream independence") {
  const auto out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);
  const auto ff = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(ff[0] == 0x408f276du);
  CHECK(ff[1] == 0x41c83b0eu);
  CHECK(ff[2] == 0xa20bc7c6u);
  CHECK(ff[3] == 0x6d5451fdu);

  Rng a(5, 0), b(5, 0), c(5, 1);
  for (int i = 0; i < 10; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
  }
}

TEST_CASE("sampler moments") {
  Rng r(99);
  double su = 0, sn = 0, sn2 = 0, sp = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    su += r.uniform();
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
    sp += static_cast<double>(r.poisson(3.0));
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sp / n == doctest::Approx(3.0).epsilon(0.02));
}
