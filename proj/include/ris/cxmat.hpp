#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ris {

using cplx = std::complex<double>;

// Raised when a factorization meets a numerically singular pivot.
struct SingularityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense complex matrix, row-major. Invariant: entries.size() == rows*cols.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, cplx(0.0, 0.0)) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  cplx* data() { return a_.data(); }
  const cplx* data() const { return a_.data(); }

  bool is_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> a_;
};

// Dense complex vector.
class CVector {
 public:
  CVector() = default;
  explicit CVector(std::size_t len) : v_(len, cplx(0.0, 0.0)) {}
  CVector(std::initializer_list<cplx> init) : v_(init) {}

  std::size_t size() const { return v_.size(); }
  cplx& operator[](std::size_t i) { return v_[i]; }
  const cplx& operator[](std::size_t i) const { return v_[i]; }

  cplx* data() { return v_.data(); }
  const cplx* data() const { return v_.data(); }

  bool is_finite() const;

 private:
  std::vector<cplx> v_;
};

// ---- products ----

CMatrix matmul(const CMatrix& a, const CMatrix& b);

// a * x (matrix times column vector)
CVector matvec(const CMatrix& a, const CVector& x);

// x^T * a (row vector times matrix), result length a.cols()
CVector vecmat(const CVector& x, const CMatrix& a);

CMatrix hermitian(const CMatrix& a);

cplx dot_conj(const CVector& a, const CVector& b);  // a^H b
cplx dot_plain(const CVector& a, const CVector& b); // a^T b

double norm2(const CVector& v);
double fro_norm(const CMatrix& a);

// ---- solves and factorizations ----

// Solves a*x = b for Hermitian positive definite a via Cholesky.
// Rejects visibly non-Hermitian input (asymmetry above 1e-9 relative to the
// largest entry magnitude); a non-positive pivot raises SingularityError.
CVector solve_hpd(const CMatrix& a, const CVector& b);

// Solves a*x = b for general square a via partially pivoted LU.
CVector solve_dense(const CMatrix& a, const CVector& b);

// Orthonormal basis of the right null space of a (requires rows < cols).
// Computed from a column-pivoted Householder QR of a^H: the trailing columns
// of Q span the orthogonal complement of the row space. Rank is decided with
// absolute tolerance 1e-10 times the largest column norm of a^H.
std::vector<CVector> null_space_basis(const CMatrix& a);

// z/|z|, with the zero input mapped to 1+0j (phase-zero convention).
cplx unit_modulus(cplx z);

}  // namespace ris
