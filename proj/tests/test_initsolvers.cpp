#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ris/channel.hpp"
#include "ris/initsolvers.hpp"
#include "ris/rng.hpp"
#include "ris/system.hpp"

using namespace ris;

namespace {

CVector random_vector(std::size_t n, RngStream& rng) {
  CVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = cplx(rng.normal(), rng.normal());
  return v;
}

// direct-only channel set with explicit composite channels
ChannelSet direct_channels(const std::vector<CVector>& w) {
  ChannelSet ch;
  ch.direct = w;
  return ch;
}

ChannelSet random_direct(std::size_t m, std::size_t k, RngStream& rng) {
  std::vector<CVector> w;
  for (std::size_t u = 0; u < k; ++u) w.push_back(random_vector(m, rng));
  return direct_channels(w);
}

double cross_interference_ratio(const CMatrix& f, const ChannelSet& ch) {
  // max over user pairs of |g~_k^T f_j| relative to |g~_k^T f_k|
  const auto comps = composite_channels(ch, {});
  double worst = 0.0;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    cplx sig(0.0, 0.0);
    for (std::size_t m = 0; m < comps[k].size(); ++m) sig += comps[k][m] * f(m, k);
    for (std::size_t j = 0; j < comps.size(); ++j) {
      if (j == k) continue;
      cplx x(0.0, 0.0);
      for (std::size_t m = 0; m < comps[k].size(); ++m) x += comps[k][m] * f(m, j);
      worst = std::max(worst, std::abs(x) / std::abs(sig));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("method1: single user returns the matched filter") {
  RngStream rng(1);
  ChannelSet ch = random_direct(4, 1, rng);
  const double p_t = 3.0;
  CMatrix f = init_method1_zf(ch, {}, p_t);
  REQUIRE(f.rows() == 4);
  REQUIRE(f.cols() == 1);
  CHECK(precoder_power(f) == doctest::Approx(p_t).epsilon(1e-12));
  // f aligned with conj(g~): f = sqrt(P_t) conj(g)/||g||
  const CVector& w = ch.direct[0];
  const double nw = norm2(w);
  for (std::size_t m = 0; m < 4; ++m)
    CHECK(std::abs(f(m, 0) - std::sqrt(p_t) * std::conj(w[m]) / nw) < 1e-12);
}

TEST_CASE("method1: orthogonal canonical channels give the scaled identity") {
  const std::size_t m = 4, k = 3;
  std::vector<CVector> w;
  for (std::size_t u = 0; u < k; ++u) {
    CVector v(m);
    v[u] = 1.0;
    w.push_back(v);
  }
  ChannelSet ch = direct_channels(w);
  const double p_t = 6.0;
  CMatrix f = init_method1_zf(ch, {}, p_t);
  const double expect = std::sqrt(p_t / 3.0);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < m; ++i) {
      if (i == j)
        CHECK(std::abs(f(i, j)) == doctest::Approx(expect).epsilon(1e-12));
      else
        CHECK(std::abs(f(i, j)) < 1e-12);
    }
}

TEST_CASE("method1: interference is zero by construction, M=4 K=3") {
  for (int trial = 0; trial < 100; ++trial) {
    RngStream rng(100 + trial);
    ChannelSet ch = random_direct(4, 3, rng);
    CMatrix f = init_method1_zf(ch, {}, 5.0);
    CHECK(precoder_power(f) == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(cross_interference_ratio(f, ch) < 1e-9);
  }
}

TEST_CASE("method1: rejects M < K") {
  RngStream rng(2);
  ChannelSet ch = random_direct(2, 3, rng);
  CHECK_THROWS_AS(init_method1_zf(ch, {}, 1.0), std::invalid_argument);
}

TEST_CASE("method2: single user collapses to the matched filter") {
  RngStream rng(3);
  ChannelSet ch = random_direct(4, 1, rng);
  const double p_t = 2.0, noise = 0.1;
  MaxMinResult r = init_method2_maxmin(ch, {}, p_t, noise);
  CHECK(r.converged);
  const CVector& w = ch.direct[0];
  const double nw = norm2(w);
  for (std::size_t m = 0; m < 4; ++m)
    CHECK(std::abs(r.F(m, 0) - std::sqrt(p_t) * std::conj(w[m]) / nw) < 1e-10);
  CHECK(r.min_sinr == doctest::Approx(p_t * nw * nw / noise).epsilon(1e-9));
}

TEST_CASE("method2: symmetric orthogonal users get equal powers and SINRs") {
  // channels equal up to unitary rotation and mutually orthogonal
  const std::size_t m = 4, k = 2;
  std::vector<CVector> w;
  for (std::size_t u = 0; u < k; ++u) {
    CVector v(m);
    v[2 * u] = cplx(0.6, 0.0);
    v[2 * u + 1] = cplx(0.0, 0.8);
    w.push_back(v);
  }
  ChannelSet ch = direct_channels(w);
  const double p_t = 4.0, noise = 0.05;
  MaxMinResult r = init_method2_maxmin(ch, {}, p_t, noise);
  CHECK(r.converged);
  CHECK(r.p[0] == doctest::Approx(p_t / 2.0).epsilon(1e-6));
  CHECK(r.p[1] == doctest::Approx(p_t / 2.0).epsilon(1e-6));
  BeamformingSolution sol;
  sol.F = r.F;
  CHECK(sinr(sol, ch, 0, noise) == doctest::Approx(sinr(sol, ch, 1, noise)).epsilon(1e-6));
  CHECK(precoder_power(r.F) == doctest::Approx(p_t).epsilon(1e-9));
}

TEST_CASE("method2: achieved min-SINR matches the bisection oracle within 1%") {
  for (int trial = 0; trial < 40; ++trial) {
    RngStream rng(500 + trial);
    const std::size_t k = 2 + rng.below(2);
    ChannelSet ch = random_direct(4, k, rng);
    const double p_t = 2.0, noise = 0.2;
    MaxMinResult r = init_method2_maxmin(ch, {}, p_t, noise);
    CHECK(r.converged);
    const auto h = testing::conj_composites(ch, {});
    const double oracle = testing::maxmin_bisection_oracle(h, r.directions, p_t, noise);
    CHECK(r.min_sinr == doctest::Approx(oracle).epsilon(0.01));
  }
}

TEST_CASE("method2: min SINR nondecreasing across sweeps, 100 seeds") {
  for (int trial = 0; trial < 100; ++trial) {
    RngStream rng(900 + trial);
    const std::size_t k = 2 + rng.below(2);
    ChannelSet ch = random_direct(4, k, rng);
    MaxMinResult r = init_method2_maxmin(ch, {}, 1.0, 0.1);
    REQUIRE(r.min_sinr_trace.size() >= 1);
    for (std::size_t t = 1; t < r.min_sinr_trace.size(); ++t)
      CHECK(r.min_sinr_trace[t] >= r.min_sinr_trace[t - 1] * (1.0 - 1e-9));
  }
}

TEST_CASE("method2: SINRs equalized at convergence and power exactly spent") {
  for (int trial = 0; trial < 20; ++trial) {
    RngStream rng(1300 + trial);
    ChannelSet ch = random_direct(4, 3, rng);
    const double p_t = 3.0, noise = 0.5, tol = 1e-6;
    MaxMinResult r = init_method2_maxmin(ch, {}, p_t, noise, tol);
    CHECK(r.converged);
    CHECK(r.F.is_finite());
    CHECK(precoder_power(r.F) == doctest::Approx(p_t).epsilon(1e-9));
    BeamformingSolution sol;
    sol.F = r.F;
    double lo = 1e300, hi = 0.0;
    for (std::size_t u = 0; u < 3; ++u) {
      const double s = sinr(sol, ch, u, noise);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    CHECK((hi - lo) / lo < 10 * tol);
    double qsum = 0.0, psum = 0.0;
    for (double x : r.q) qsum += x;
    for (double x : r.p) psum += x;
    CHECK(qsum == doctest::Approx(p_t).epsilon(1e-9));
    CHECK(psum == doctest::Approx(p_t).epsilon(1e-9));
  }
}

TEST_CASE("closed-form powers: decoupled users") {
  const std::size_t k = 3;
  CMatrix gamma(k, k), f0(k, k);
  gamma(0, 0) = 0.5;
  gamma(1, 1) = 1.5;
  gamma(2, 2) = 2.0;
  const double eta = 0.7, rho0 = 4.0;
  const auto p = maxmin_power_closed_form(gamma, f0, eta, rho0);
  for (std::size_t i = 0; i < k; ++i)
    CHECK(p[i] == doctest::Approx(eta / rho0 * std::real(gamma(i, i))).epsilon(1e-12));
}

TEST_CASE("closed-form powers: K=2 symmetric coupling matches the hand solution") {
  CMatrix gamma(2, 2), f0(2, 2);
  const double g = 1.3, c = 0.4, eta = 0.9, rho0 = 2.0;
  gamma(0, 0) = g;
  gamma(1, 1) = g;
  f0(0, 1) = c;
  f0(1, 0) = c;
  const auto p = maxmin_power_closed_form(gamma, f0, eta, rho0);
  const double expect = (eta / rho0) * g / (1.0 - eta * g * c);
  CHECK(p[0] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("closed-form powers: self-consistency, substituted SINRs equal eta") {
  RngStream rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 2 + rng.below(3);
    CMatrix gamma(k, k), f0(k, k);
    for (std::size_t i = 0; i < k; ++i) {
      gamma(i, i) = rng.uniform(0.5, 2.0);
      for (std::size_t j = 0; j < k; ++j)
        if (i != j) f0(i, j) = rng.uniform(0.0, 0.2);
    }
    const double rho0 = rng.uniform(1.0, 5.0);
    const double eta = 0.5;
    std::vector<double> p;
    try {
      p = maxmin_power_closed_form(gamma, f0, eta, rho0);
    } catch (const InfeasibleError&) {
      continue;  // random instance not supportable at this eta
    }
    for (std::size_t i = 0; i < k; ++i) {
      double intf = 0.0;
      for (std::size_t j = 0; j < k; ++j) intf += std::real(f0(i, j)) * p[j];
      const double xi = (p[i] / std::real(gamma(i, i))) / (intf + 1.0 / rho0);
      CHECK(xi == doctest::Approx(eta).epsilon(1e-8));
    }
  }
}

TEST_CASE("closed-form powers: unsupportable eta raises the infeasibility error") {
  CMatrix gamma(2, 2), f0(2, 2);
  gamma(0, 0) = 1.0;
  gamma(1, 1) = 1.0;
  f0(0, 1) = 1.0;
  f0(1, 0) = 1.0;
  // spectral radius of eta*gamma*f0 is eta; eta >= 1 is infeasible
  CHECK_THROWS_AS(maxmin_power_closed_form(gamma, f0, 1.5, 1.0), InfeasibleError);
}

TEST_CASE("both initializers spend the budget and stay finite through RIS chains") {
  RngStream rng(11);
  SystemConfig cfg;
  cfg.M = 4;
  cfg.K = 3;
  cfg.I = 2;
  cfg.N = {6, 5};
  Topology topo;
  topo.bs = {0, 0, 0};
  topo.ris = {{3, 0.4, 0}, {7, -0.2, 0}};
  topo.users = {{10, 0, 0}, {10, 1, 0}, {10, -1, 0}};
  ThzLinkParams p;
  p.alpha_molec = calibrate_alpha(p.frequency, 10.0, 100.0);
  RicianFactors rf;
  ChannelSet ch = realize_channels(cfg, topo, p, rf, RngStream(21));

  std::vector<CVector> phases;
  for (std::size_t n : cfg.N) {
    CVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = 1.0;
    phases.push_back(v);
  }

  CMatrix f1 = init_method1_zf(ch, phases, cfg.P_t);
  CHECK(f1.is_finite());
  CHECK(precoder_power(f1) == doctest::Approx(cfg.P_t).epsilon(1e-9));

  MaxMinResult r = init_method2_maxmin(ch, phases, cfg.P_t, cfg.noise_power);
  CHECK(r.F.is_finite());
  CHECK(precoder_power(r.F) == doctest::Approx(cfg.P_t).epsilon(1e-9));
  CHECK(r.converged);
}
