#include "ris/cxmat.hpp"

#include <algorithm>
#include <cmath>

namespace ris {

bool CMatrix::is_finite() const {
  for (const cplx& z : a_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

bool CVector::is_finite() const {
  for (const cplx& z : v_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

CMatrix matmul(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  CMatrix c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx(0.0, 0.0)) continue;
      const cplx* brow = b.data() + k * n;
      cplx* crow = c.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

CVector matvec(const CMatrix& a, const CVector& x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
  CVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx s(0.0, 0.0);
    const cplx* row = a.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

CVector vecmat(const CVector& x, const CMatrix& a) {
  if (a.rows() != x.size()) throw std::invalid_argument("vecmat: dimension mismatch");
  CVector y(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const cplx xi = x[i];
    const cplx* row = a.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += xi * row[j];
  }
  return y;
}

CMatrix hermitian(const CMatrix& a) {
  CMatrix h(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) h(j, i) = std::conj(a(i, j));
  return h;
}

cplx dot_conj(const CVector& a, const CVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot_conj: length mismatch");
  cplx s(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

cplx dot_plain(const CVector& a, const CVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot_plain: length mismatch");
  cplx s(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const CVector& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += std::norm(v[i]);
  return std::sqrt(s);
}

double fro_norm(const CMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

CVector solve_hpd(const CMatrix& a, const CVector& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("solve_hpd: matrix not square");
  if (b.size() != n) throw std::invalid_argument("solve_hpd: rhs length mismatch");

  double amax = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) amax = std::max(amax, std::abs(a(i, j)));
  const double tol = 1e-9 * std::max(amax, 1e-300);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      if (std::abs(a(i, j) - std::conj(a(j, i))) > tol)
        throw std::invalid_argument("solve_hpd: matrix is not Hermitian");

  // Cholesky a = L L^H, lower triangular L. Pivots are held to a floor
  // relative to the largest diagonal entry so rank-deficient input raises
  // SingularityError instead of amplifying roundoff.
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a(i, i).real());
  CMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 1e-13 * max_diag) || !std::isfinite(d))
      throw SingularityError("solve_hpd: non-positive pivot during Cholesky");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }

  // forward, then backward substitution
  CVector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  CVector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    cplx s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(l(k, ii)) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

CVector solve_dense(const CMatrix& a, const CVector& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("solve_dense: matrix not square");
  if (b.size() != n) throw std::invalid_argument("solve_dense: rhs length mismatch");
  CMatrix m = a;
  CVector x = b;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(m(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(m(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0 || !std::isfinite(best))
      throw SingularityError("solve_dense: singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      std::swap(x[k], x[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const cplx f = m(i, k) / m(k, k);
      m(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
      x[i] -= f * x[k];
    }
  }
  for (std::size_t ii = n; ii-- > 0;) {
    cplx s = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= m(ii, j) * x[j];
    x[ii] = s / m(ii, ii);
  }
  return x;
}

std::vector<CVector> null_space_basis(const CMatrix& a) {
  const std::size_t r = a.rows();
  const std::size_t m = a.cols();
  if (r >= m) throw std::invalid_argument("null_space_basis: requires rows < cols");

  // Work on b = a^H (m x r); Householder QR with column pivoting.
  CMatrix b = hermitian(a);

  double max_colnorm = 0.0;
  std::vector<double> colnorm(r, 0.0);
  for (std::size_t j = 0; j < r; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += std::norm(b(i, j));
    colnorm[j] = std::sqrt(s);
    max_colnorm = std::max(max_colnorm, colnorm[j]);
  }
  const double tol = 1e-10 * max_colnorm;

  std::vector<CVector> reflectors;  // length-m Householder vectors, zero-padded above k
  std::vector<double> betas;
  std::size_t rank = 0;

  for (std::size_t k = 0; k < r; ++k) {
    // pivot: move the remaining column with the largest trailing norm to k
    std::size_t piv = k;
    double best = -1.0;
    for (std::size_t j = k; j < r; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += std::norm(b(i, j));
      if (s > best) {
        best = s;
        piv = j;
      }
    }
    if (piv != k)
      for (std::size_t i = 0; i < m; ++i) std::swap(b(i, k), b(i, piv));

    const double xnorm = std::sqrt(std::max(best, 0.0));
    if (xnorm <= tol) break;  // remaining columns are numerically dependent
    ++rank;

    // Householder vector v s.t. (I - beta v v^H) x = -phase*|x| e_k
    CVector v(m);
    const cplx x0 = b(k, k);
    const cplx phase = (std::abs(x0) > 0.0) ? x0 / std::abs(x0) : cplx(1.0, 0.0);
    const cplx alpha = -phase * xnorm;
    v[k] = x0 - alpha;
    for (std::size_t i = k + 1; i < m; ++i) v[i] = b(i, k);
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) vnorm2 += std::norm(v[i]);
    const double beta = (vnorm2 > 0.0) ? 2.0 / vnorm2 : 0.0;

    // apply reflector to the remaining columns of b
    for (std::size_t j = k; j < r; ++j) {
      cplx s(0.0, 0.0);
      for (std::size_t i = k; i < m; ++i) s += std::conj(v[i]) * b(i, j);
      s *= beta;
      for (std::size_t i = k; i < m; ++i) b(i, j) -= s * v[i];
    }
    reflectors.push_back(std::move(v));
    betas.push_back(beta);
  }

  // Null space of a = trailing m-rank columns of Q = H_0 H_1 ... applied to e_j.
  std::vector<CVector> basis;
  basis.reserve(m - rank);
  for (std::size_t j = rank; j < m; ++j) {
    CVector q(m);
    q[j] = 1.0;
    for (std::size_t t = reflectors.size(); t-- > 0;) {
      const CVector& v = reflectors[t];
      cplx s(0.0, 0.0);
      for (std::size_t i = t; i < m; ++i) s += std::conj(v[i]) * q[i];
      s *= betas[t];
      for (std::size_t i = t; i < m; ++i) q[i] -= s * v[i];
    }
    basis.push_back(std::move(q));
  }
  return basis;
}

cplx unit_modulus(cplx z) {
  const double mag = std::abs(z);
  if (mag == 0.0) return cplx(1.0, 0.0);
  return z / mag;
}

}  // namespace ris
