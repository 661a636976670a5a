#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ris/cxmat.hpp"
#include "ris/rng.hpp"

using namespace ris;

namespace {

CMatrix random_matrix(std::size_t r, std::size_t c, RngStream& rng) {
  CMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = cplx(rng.normal(), rng.normal());
  return m;
}

CVector random_vector(std::size_t n, RngStream& rng) {
  CVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = cplx(rng.normal(), rng.normal());
  return v;
}

// independent oracle: naive triple loop, index arithmetic spelled out
CMatrix matmul_oracle(const CMatrix& a, const CMatrix& b) {
  CMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      cplx s(0.0, 0.0);
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

// random Hermitian positive definite matrix M^H M + I
CMatrix random_hpd(std::size_t n, RngStream& rng) {
  CMatrix m = random_matrix(n, n, rng);
  CMatrix a = matmul(hermitian(m), m);
  for (std::size_t i = 0; i < n; ++i) a(i, i) += 1.0;
  return a;
}

}  // namespace

TEST_CASE("matmul: identity and row swap") {
  RngStream rng(7);
  CMatrix a = random_matrix(2, 2, rng);
  CMatrix i2 = CMatrix::identity(2);
  CHECK(max_abs_diff(matmul(i2, a), a) == doctest::Approx(0.0));

  CMatrix perm(2, 2);
  perm(0, 1) = 1.0;
  perm(1, 0) = 1.0;
  CMatrix swapped = matmul(perm, a);
  CHECK(swapped(0, 0) == a(1, 0));
  CHECK(swapped(0, 1) == a(1, 1));
  CHECK(swapped(1, 0) == a(0, 0));
  CHECK(swapped(1, 1) == a(0, 1));
}

TEST_CASE("matmul: matches triple-loop oracle") {
  RngStream rng(11);
  CMatrix a = random_matrix(3, 4, rng);
  CMatrix b = random_matrix(4, 2, rng);
  CHECK(max_abs_diff(matmul(a, b), matmul_oracle(a, b)) < 1e-12);
}

TEST_CASE("matmul: rejects dimension mismatch") {
  CMatrix a(2, 3), b(2, 2);
  CHECK_THROWS_AS(matmul(a, b), std::invalid_argument);
}

TEST_CASE("matmul: associativity on random triples") {
  RngStream rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 1 + rng.below(6), q = 1 + rng.below(6);
    const std::size_t r = 1 + rng.below(6), s = 1 + rng.below(6);
    CMatrix a = random_matrix(p, q, rng);
    CMatrix b = random_matrix(q, r, rng);
    CMatrix c = random_matrix(r, s, rng);
    CMatrix lhs = matmul(matmul(a, b), c);
    CMatrix rhs = matmul(a, matmul(b, c));
    double scale = std::max(fro_norm(lhs), 1e-30);
    CHECK(max_abs_diff(lhs, rhs) / scale < 1e-10);
  }
}

TEST_CASE("solve_hpd: identity and scalar systems") {
  RngStream rng(17);
  CVector v = random_vector(4, rng);
  CVector x = solve_hpd(CMatrix::identity(4), v);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(x[i] - v[i]) < 1e-14);

  CMatrix two = CMatrix::identity(3);
  for (std::size_t i = 0; i < 3; ++i) two(i, i) = 2.0;
  CVector ones(3);
  for (std::size_t i = 0; i < 3; ++i) ones[i] = 1.0;
  CVector half = solve_hpd(two, ones);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(half[i] - cplx(0.5, 0.0)) < 1e-14);
}

TEST_CASE("solve_hpd: residual on random HPD systems up to dimension 64") {
  RngStream rng(19);
  for (std::size_t n : {5u, 16u, 33u, 64u}) {
    CMatrix a = random_hpd(n, rng);
    CVector b = random_vector(n, rng);
    CVector x = solve_hpd(a, b);
    CVector ax = matvec(a, x);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err += std::norm(ax[i] - b[i]);
    CHECK(std::sqrt(err) / norm2(b) < 1e-10);
  }
}

TEST_CASE("solve_hpd: rejects non-Hermitian input and singular input") {
  RngStream rng(23);
  CMatrix a = random_hpd(3, rng);
  a(0, 1) += cplx(1e-3, 0.0);
  CVector b = random_vector(3, rng);
  CHECK_THROWS_AS(solve_hpd(a, b), std::invalid_argument);

  CMatrix zero(3, 3);  // Hermitian but not positive definite
  CHECK_THROWS_AS(solve_hpd(zero, b), SingularityError);
}

TEST_CASE("null_space_basis: canonical rows leave the remaining coordinates") {
  const std::size_t m = 6, k1 = 3;  // first K-1 rows of I_M
  CMatrix a(k1, m);
  for (std::size_t i = 0; i < k1; ++i) a(i, i) = 1.0;
  auto basis = null_space_basis(a);
  REQUIRE(basis.size() == m - k1);
  // span test: each basis vector annihilated by a, zero in the first k1 coords
  for (const CVector& v : basis) {
    CVector av = matvec(a, v);
    CHECK(norm2(av) < 1e-9);
    double head = 0.0;
    for (std::size_t i = 0; i < k1; ++i) head += std::norm(v[i]);
    CHECK(head < 1e-18);
  }
}

TEST_CASE("null_space_basis: 2D orthogonal complement") {
  CMatrix a(1, 2);
  const double s = 1.0 / std::sqrt(2.0);
  a(0, 0) = s;
  a(0, 1) = s;
  auto basis = null_space_basis(a);
  REQUIRE(basis.size() == 1);
  // proportional to (1,-1)/sqrt(2)
  const cplx ratio = basis[0][0] / basis[0][1];
  CHECK(std::abs(ratio + 1.0) < 1e-12);
  CHECK(std::abs(norm2(basis[0]) - 1.0) < 1e-12);
}

TEST_CASE("null_space_basis: defining properties on random 3x8") {
  RngStream rng(29);
  CMatrix a = random_matrix(3, 8, rng);
  auto basis = null_space_basis(a);
  REQUIRE(basis.size() == 5);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    CHECK(norm2(matvec(a, basis[i])) < 1e-9);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const cplx g = dot_conj(basis[i], basis[j]);
      const double expect = (i == j) ? 1.0 : 0.0;
      CHECK(std::abs(g - expect) < 1e-10);
    }
  }
}

TEST_CASE("null_space_basis: annihilation and orthonormality, 1000 random inputs") {
  RngStream rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t rows = 1 + rng.below(6);
    const std::size_t cols = rows + 1 + rng.below(8);
    CMatrix a = random_matrix(rows, cols, rng);
    const double scale = fro_norm(a);
    auto basis = null_space_basis(a);
    REQUIRE(basis.size() >= cols - rows);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      CHECK(norm2(matvec(a, basis[i])) < 1e-9 * std::max(1.0, scale));
      for (std::size_t j = i; j < basis.size(); ++j) {
        const cplx g = dot_conj(basis[i], basis[j]);
        const double expect = (i == j) ? 1.0 : 0.0;
        CHECK(std::abs(g - expect) < 1e-10);
      }
    }
  }
}

TEST_CASE("null_space_basis: rank deficiency just yields more vectors") {
  RngStream rng(37);
  CMatrix a(3, 6);
  CVector row = random_vector(6, rng);
  for (std::size_t j = 0; j < 6; ++j) {
    a(0, j) = row[j];
    a(1, j) = 2.0 * row[j];
    a(2, j) = cplx(0.0, 1.0) * row[j];
  }
  auto basis = null_space_basis(a);
  CHECK(basis.size() == 5);  // rank 1
  for (const CVector& v : basis) CHECK(norm2(matvec(a, v)) < 1e-9 * norm2(row));
}

TEST_CASE("unit_modulus") {
  CHECK(std::abs(unit_modulus(cplx(3.0, 4.0)) - cplx(0.6, 0.8)) < 1e-15);
  CHECK(unit_modulus(cplx(0.0, 0.0)) == cplx(1.0, 0.0));
  const cplx e = std::polar(1.0, 0.7);
  CHECK(std::abs(unit_modulus(e) - e) < 1e-15);

  RngStream rng(41);
  for (int i = 0; i < 200; ++i) {
    const cplx z(rng.normal(), rng.normal());
    CHECK(std::abs(std::abs(unit_modulus(z)) - 1.0) <= 1e-15);
  }
}

TEST_CASE("solve_dense: matches solve_hpd on HPD systems") {
  RngStream rng(43);
  CMatrix a = random_hpd(6, rng);
  CVector b = random_vector(6, rng);
  CVector x1 = solve_hpd(a, b);
  CVector x2 = solve_dense(a, b);
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(x1[i] - x2[i]) < 1e-10);
}
