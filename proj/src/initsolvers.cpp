#include "ris/initsolvers.hpp"

#include <algorithm>
#include <cmath>

#include "ris/channel.hpp"

namespace ris {

namespace {

// conjugated composite channels: received symbol is g~^T f = h^H f
std::vector<CVector> conjugate_composites(const ChannelSet& ch,
                                          const std::vector<CVector>& phases) {
  std::vector<CVector> h = composite_channels(ch, phases);
  for (CVector& v : h)
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::conj(v[i]);
  return h;
}

CVector scale_vec(const CVector& v, cplx s) {
  CVector out = v;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return out;
}

}  // namespace

CMatrix init_method1_zf(const ChannelSet& ch, const std::vector<CVector>& phases,
                        double p_t) {
  const std::size_t k_users = ch.direct.size();
  if (k_users == 0) throw std::invalid_argument("init_method1_zf: no users");
  const std::size_t m = ch.direct[0].size();
  if (m < k_users)
    throw std::invalid_argument("init_method1_zf: requires M >= K for non-empty null spaces");

  const std::vector<CVector> h = conjugate_composites(ch, phases);

  CMatrix f(m, k_users);
  const double per_user = std::sqrt(p_t / static_cast<double>(k_users));
  for (std::size_t k = 0; k < k_users; ++k) {
    CVector dir(m);
    if (k_users == 1) {
      dir = h[0];  // no interferers: the whole space, take the matched direction
    } else {
      CMatrix stacked(k_users - 1, m);
      std::size_t r = 0;
      for (std::size_t j = 0; j < k_users; ++j) {
        if (j == k) continue;
        for (std::size_t c = 0; c < m; ++c) stacked(r, c) = std::conj(h[j][c]);
        ++r;
      }
      const auto basis = null_space_basis(stacked);
      if (basis.empty()) throw std::invalid_argument("init_method1_zf: empty null space");
      // projection of the matched direction onto the null space; this is the
      // null-space vector with the largest projection onto the user channel
      for (const CVector& v : basis) {
        const cplx coef = dot_conj(v, h[k]);
        for (std::size_t c = 0; c < m; ++c) dir[c] += coef * v[c];
      }
      if (norm2(dir) < 1e-300) dir = basis[0];  // channel orthogonal to the null space
    }
    const double nn = norm2(dir);
    for (std::size_t c = 0; c < m; ++c) f(c, k) = dir[c] / nn * per_user;
  }
  return f;
}

MaxMinResult init_method2_maxmin(const ChannelSet& ch, const std::vector<CVector>& phases,
                                 double p_t, double noise_power, double tol,
                                 std::size_t max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("init_method2_maxmin: tol must be > 0");
  if (!(p_t > 0.0) || !(noise_power > 0.0))
    throw std::invalid_argument("init_method2_maxmin: powers must be > 0");

  const std::vector<CVector> h = conjugate_composites(ch, phases);
  const std::size_t kk = h.size();
  const std::size_t m = h[0].size();
  for (const CVector& v : h)
    if (norm2(v) <= 0.0)
      throw std::invalid_argument("init_method2_maxmin: a composite channel is zero");

  const double kd = static_cast<double>(kk);
  const double rho0 = p_t / (kd * noise_power);
  const double reg = 1.0 / rho0;

  // normalized powers, sum K; physical powers are (P_t/K) times these
  std::vector<double> q(kk, 1.0), p(kk, 1.0);
  std::vector<CVector> v(kk);
  for (std::size_t k = 0; k < kk; ++k) v[k] = scale_vec(h[k], 1.0 / norm2(h[k]));

  auto equalized_sinr = [&](const std::vector<double>& pw,
                            const std::vector<CVector>& dirs, std::size_t k) {
    // dirs are unit norm; SINR of user k under columns sqrt(pw_l) dirs_l
    double sig = pw[k] * std::norm(dot_conj(h[k], dirs[k]));
    double intf = 0.0;
    for (std::size_t l = 0; l < kk; ++l)
      if (l != k) intf += pw[l] * std::norm(dot_conj(h[k], dirs[l]));
    return sig / (intf + reg);
  };

  auto solve_regularized = [&](const std::vector<double>& qq, std::size_t k) {
    CMatrix a(m, m);
    for (std::size_t l = 0; l < kk; ++l) {
      if (l == k) continue;
      for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c) a(r, c) += qq[l] * h[l][r] * std::conj(h[l][c]);
    }
    for (std::size_t r = 0; r < m; ++r) a(r, r) += reg;
    return solve_hpd(a, h[k]);
  };

  MaxMinResult best;
  double best_min = -1.0;
  bool converged = false;
  std::size_t it = 0;

  for (it = 0; it < max_iter && !converged; ++it) {
    // (1) dual auxiliary variables q~_k = (h^H A(q)^{-1} h)^{-1}
    std::vector<double> qt(kk);
    for (std::size_t k = 0; k < kk; ++k) {
      const CVector x = solve_regularized(q, k);
      qt[k] = 1.0 / std::real(dot_conj(h[k], x));
    }
    // minimum dual uplink SINR of the current iterate, q_k / q~_k; this is
    // the Collatz-Wielandt lower bound and rises monotonically under the
    // normalized fixed-point iteration
    double min_ul = q[0] / qt[0];
    for (std::size_t k = 1; k < kk; ++k) min_ul = std::min(min_ul, q[k] / qt[k]);
    best.min_sinr_trace.push_back(min_ul);
    // (2) renormalize dual powers to the budget
    double qtsum = 0.0;
    for (double x : qt) qtsum += x;
    for (std::size_t k = 0; k < kk; ++k) q[k] = kd * qt[k] / qtsum;

    // (3)(4) downlink auxiliary variables and power rebalancing, with the
    // SINRs evaluated at the current directions
    std::vector<double> pt(kk);
    for (std::size_t k = 0; k < kk; ++k) pt[k] = p[k] / equalized_sinr(p, v, k);
    double psum = 0.0;
    for (double x : pt) psum += x;
    for (std::size_t k = 0; k < kk; ++k) p[k] = kd * pt[k] / psum;

    // (5) refresh beam directions from the regularized solves
    for (std::size_t k = 0; k < kk; ++k) {
      CVector d = solve_regularized(q, k);
      v[k] = scale_vec(d, 1.0 / norm2(d));
    }

    double lo = 0.0, hi = 0.0;
    for (std::size_t k = 0; k < kk; ++k) {
      const double s = equalized_sinr(p, v, k);
      if (k == 0) {
        lo = hi = s;
      } else {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
    }
    if (lo > best_min) {
      best_min = lo;
      best.q = q;
      best.p = p;
      best.directions = v;
    }
    converged = (hi - lo) <= tol * lo;
  }

  if (converged) {
    best_min = 0.0;
    best.q = q;
    best.p = p;
    best.directions = v;
    for (std::size_t k = 0; k < kk; ++k) {
      const double s = equalized_sinr(p, v, k);
      best_min = (k == 0) ? s : std::min(best_min, s);
    }
  }

  best.converged = converged;
  best.iterations = it;
  best.min_sinr = best_min;

  const double watts = p_t / kd;
  CMatrix f(m, kk);
  for (std::size_t k = 0; k < kk; ++k) {
    const double col = std::sqrt(best.p[k] * watts);
    for (std::size_t r = 0; r < m; ++r) f(r, k) = col * best.directions[k][r];
    best.p[k] *= watts;
    best.q[k] *= watts;
  }
  best.F = std::move(f);
  return best;
}

double spectral_radius_nonneg(const CMatrix& mat) {
  const std::size_t n = mat.rows();
  if (n == 0) return 0.0;
  std::vector<double> x(n, 1.0);
  double lambda = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) y[i] += std::real(mat(i, j)) * x[j];
    double nn = 0.0;
    for (double v : y) nn = std::max(nn, std::abs(v));
    if (nn == 0.0) return 0.0;
    const double prev = lambda;
    lambda = nn;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / nn;
    if (iter > 5 && std::abs(lambda - prev) <= 1e-13 * lambda) break;
  }
  return lambda;
}

std::vector<double> maxmin_power_closed_form(const CMatrix& gamma, const CMatrix& f0,
                                             double eta, double rho0) {
  const std::size_t kk = gamma.rows();
  if (gamma.cols() != kk || f0.rows() != kk || f0.cols() != kk)
    throw std::invalid_argument("maxmin_power_closed_form: dimension mismatch");
  if (!(eta > 0.0) || !(rho0 > 0.0))
    throw std::invalid_argument("maxmin_power_closed_form: eta and rho0 must be > 0");

  CMatrix coupling(kk, kk);
  for (std::size_t i = 0; i < kk; ++i)
    for (std::size_t j = 0; j < kk; ++j)
      coupling(i, j) = eta * std::real(gamma(i, i)) * std::real(f0(i, j));
  if (spectral_radius_nonneg(coupling) >= 1.0)
    throw InfeasibleError("maxmin_power_closed_form: eta not supportable (spectral radius >= 1)");

  CMatrix a(kk, kk);
  CVector b(kk);
  for (std::size_t i = 0; i < kk; ++i) {
    for (std::size_t j = 0; j < kk; ++j) a(i, j) = ((i == j) ? 1.0 : 0.0) - coupling(i, j);
    b[i] = eta / rho0 * std::real(gamma(i, i));
  }
  const CVector x = solve_dense(a, b);
  std::vector<double> p(kk);
  for (std::size_t i = 0; i < kk; ++i) {
    p[i] = std::real(x[i]);
    if (!(p[i] > 0.0))
      throw InfeasibleError("maxmin_power_closed_form: non-positive power component");
  }
  return p;
}

}  // namespace ris
